use serde_json::{json, Value};
use toklens_core::corpus::{self, load_parallel, write_tsv, Corpus, CorpusLanguage, ParallelFormat, ParallelSource};
use toklens_core::lang::LanguageRegistry;
use toklens_core::metrics::{tokenization_ratio, tokenization_ratio_compressed, vocab_overlap};
use toklens_core::postok::{self, census, detect_prefix, read_ptk, write_ptk, PrefixCodec};
use toklens_core::quadrant::{self, classify, PerformanceMatrix, QuadrantAssignment, QuadrantCounts, SignificanceParams};
use toklens_core::report::{emit_quadrant_plot, write_plot_csv};
use toklens_core::tokenizer::{extend_vocab, train_bbpe, train_bpe, train_unigram, Tokenizer};

use crate::args::*;
use crate::report::{rows_csv, Failure, Inputs, Outcome, Output};

fn lines(text: &str) -> Vec<&str> {
    corpus::lines(text).collect()
}

fn tokenizer(inputs: &mut Inputs, path: &std::path::Path) -> Outcome<Tokenizer> {
    inputs.parse(path, |b| Tokenizer::from_json(&String::from_utf8_lossy(b)))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn run(command: &Command, seed: u64, inputs: &mut Inputs) -> Outcome<Output> {
    match command {
        Command::TrainVocab(a) => train(a, inputs),
        Command::ExtendVocab(a) => {
            let base = tokenizer(inputs, &a.base)?;
            let learned = tokenizer(inputs, &a.learned)?;
            let t = extend_vocab(&base, &learned, a.size)?;
            Ok(Output::Raw(vocab_bytes(&t)))
        }
        Command::Analyze(Analyze::Tokenization(a)) => analyze_tokenization(a, inputs),
        Command::Analyze(Analyze::Overlap(a)) => {
            let t = tokenizer(inputs, &a.vocab)?;
            let ta = inputs.text(&a.a)?;
            let tb = inputs.text(&a.b)?;
            let r = vocab_overlap(&lines(&ta), &lines(&tb), &t)?;
            let body = to_value(&r);
            let csv = rows_csv(std::slice::from_ref(&body))?;
            Ok(Output::report("analyze overlap", body).with_csv(csv))
        }
        Command::Census(a) => {
            let text = inputs.text(&a.corpus)?;
            Ok(Output::report("census", to_value(&census(lines(&text)))))
        }
        Command::Compress(a) => compress(a, inputs),
        Command::Decompress(a) => {
            let stream = inputs.bytes(&a.input)?;
            let (header, payload) = read_ptk(&stream).map_err(|e| in_path(e, &a.input))?;
            if let Some(path) = &a.codec {
                let given = inputs.parse(path, |b| PrefixCodec::from_json(&String::from_utf8_lossy(b)))?;
                if given != header {
                    return Err(Failure::Data {
                        code: "codec-mismatch",
                        message: format!(
                            "codec prefix 0x{:02X} differs from stream header 0x{:02X}",
                            given.prefix_byte(),
                            header.prefix_byte()
                        ),
                    });
                }
            }
            let text = postok::decompress(payload, &header).map_err(|e| in_path(e, &a.input))?;
            Ok(Output::Raw(text.into_bytes()))
        }
        Command::Classify(a) => {
            let m = matrix(&a.matrix, inputs)?;
            let params = SignificanceParams::for_matrix(&m, a.k)?;
            let assignments = classify(&m, &params)?;
            let csv = rows_csv(&assignments.iter().map(assignment_row).collect::<Vec<_>>())?;
            let body = json!({
                "k": params.k,
                "threshold": params.threshold,
                "mult_directions": to_value(&m.mult_directions),
                "counts": to_value(&QuadrantCounts::tally(&assignments)),
                "assignments": to_value(&assignments),
            });
            Ok(Output::report("classify", body).with_csv(csv))
        }
        Command::Sweep(a) => {
            let m = matrix(&a.matrix, inputs)?;
            let rows = quadrant::sweep(&m, &a.k)?;
            let values: Vec<Value> = rows.iter().map(to_value).collect();
            let csv = rows_csv(&values)?;
            let body = json!({ "mult_directions": to_value(&m.mult_directions), "rows": values });
            Ok(Output::report("sweep", body).with_csv(csv))
        }
        Command::PlotQuadrant(a) => plot_quadrant(a, inputs),
        Command::Sample(a) => sample(a, seed, inputs),
    }
}

fn in_path(e: toklens_core::Error, path: &std::path::Path) -> Failure {
    Failure::from(e).in_file(path)
}

fn vocab_bytes(t: &Tokenizer) -> Vec<u8> {
    let mut s = t.to_json();
    s.push('\n');
    s.into_bytes()
}

fn train(a: &TrainVocab, inputs: &mut Inputs) -> Outcome<Output> {
    let text = inputs.text(&a.input)?;
    let corpus = lines(&text);
    let t = match a.mode {
        TrainMode::Bbpe => train_bbpe(&corpus, a.size, a.pre_split.into())?,
        TrainMode::Bpe => train_bpe(&corpus, a.size)?,
        TrainMode::Unigram => train_unigram(&corpus, a.size, a.pre_split.into())?,
    };
    Ok(Output::Raw(vocab_bytes(&t)))
}

fn analyze_tokenization(a: &Tokenization, inputs: &mut Inputs) -> Outcome<Output> {
    let registry = match &a.registry {
        Some(path) => inputs.parse(path, |b| LanguageRegistry::from_reader(b))?,
        None => LanguageRegistry::builtin(),
    };
    let lang = registry.lookup(&a.lang)?;
    let t = tokenizer(inputs, &a.vocab)?;
    let text = inputs.text(&a.corpus)?;
    let corpus = lines(&text);
    let r = match &a.codec {
        Some(path) => {
            let codec = inputs.parse(path, |b| PrefixCodec::from_json(&String::from_utf8_lossy(b)))?;
            tokenization_ratio_compressed(&corpus, &t, lang, &codec)?
        }
        None => tokenization_ratio(&corpus, &t, lang)?,
    };
    let body = to_value(&r);
    let csv = rows_csv(std::slice::from_ref(&body))?;
    Ok(Output::report("analyze tokenization", body).with_csv(csv))
}

fn compress(a: &Compress, inputs: &mut Inputs) -> Outcome<Output> {
    let text = inputs.text(&a.input)?;
    let codec = match a.prefix {
        Prefix::Byte(b) => PrefixCodec::new(b)?,
        Prefix::Auto => detect_prefix(&census(lines(&text))).ok_or_else(|| Failure::Data {
            code: "no-dominant-prefix",
            message: format!("{}: no three-byte characters to pick a prefix from", a.input.display()),
        })?,
    };
    if let Some(path) = &a.codec_out {
        std::fs::write(path, codec.to_json() + "\n").map_err(|e| Failure::Data {
            code: "io",
            message: format!("{}: {e}", path.display()),
        })?;
    }
    Ok(Output::Raw(write_ptk(&codec, &postok::compress(&text, &codec))))
}

fn matrix(a: &MatrixArgs, inputs: &mut Inputs) -> Outcome<PerformanceMatrix> {
    let m = inputs.parse(&a.matrix, |b| PerformanceMatrix::from_csv(b))?;
    with_mult(m, &a.mult)
}

fn with_mult(m: PerformanceMatrix, mult: &[quadrant::Direction]) -> Outcome<PerformanceMatrix> {
    match mult {
        [] => Ok(m),
        [a, b] => Ok(m.with_mult_directions([a.clone(), b.clone()])?),
        other => Err(Failure::usage(format!(
            "--mult takes exactly two directions, got {}",
            other.len()
        ))),
    }
}

fn assignment_row(a: &QuadrantAssignment) -> Value {
    json!({
        "language": a.language,
        "quadrant": a.quadrant.name(),
        "bilingual_delta": a.bilingual_delta.map(|d| d.value),
        "multilingual_delta": a.multilingual_delta.value,
    })
}

fn plot_quadrant(a: &PlotQuadrant, inputs: &mut Inputs) -> Outcome<Output> {
    let assignments = match (&a.matrix, &a.assignments) {
        (Some(path), _) => {
            let m = with_mult(inputs.parse(path, |b| PerformanceMatrix::from_csv(b))?, &a.mult)?;
            classify(&m, &SignificanceParams::for_matrix(&m, a.k)?)?
        }
        (None, Some(path)) => inputs.parse(path, |b| {
            let report: Value = serde_json::from_slice(b)?;
            let list = report.get("assignments").cloned().unwrap_or(report);
            Ok(serde_json::from_value::<Vec<QuadrantAssignment>>(list)?)
        })?,
        (None, None) => return Err(Failure::usage("plot-quadrant needs --matrix or --assignments")),
    };
    let series = emit_quadrant_plot(&assignments);
    let mut csv = Vec::new();
    write_plot_csv(&mut csv, &series)?;
    Ok(Output::report("plot-quadrant", json!({ "series": to_value(&series) })).with_csv(csv))
}

fn sample(a: &Sample, seed: u64, inputs: &mut Inputs) -> Outcome<Output> {
    let mut out = Vec::new();
    if a.tsv {
        inputs.bytes(&a.input)?;
        let pairs = load_parallel(ParallelSource::Single(&a.input, ParallelFormat::Tsv), "src", "tgt")
            .map_err(|e| in_path(e, &a.input))?;
        write_tsv(&mut out, &pairs.sample(a.n, seed).records)?;
    } else {
        let text = inputs.text(&a.input)?;
        let corpus = Corpus {
            language: CorpusLanguage::Mono(String::new()),
            records: lines(&text),
        };
        for line in corpus.sample(a.n, seed).records {
            out.extend_from_slice(line.as_bytes());
            out.push(b'\n');
        }
    }
    Ok(Output::Raw(out))
}
