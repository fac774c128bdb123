use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use toklens_bench::corpus;
use toklens_core::postok::{census, compress, decompress, PrefixCodec};
use toklens_core::quadrant::{classify, sweep, ted_fixture, SignificanceParams};

fn codec(c: &mut Criterion) {
    let text = corpus(2_000).join("\n");
    let codec = PrefixCodec::new(0xE0).unwrap();
    let packed = compress(&text, &codec);
    let mut g = c.benchmark_group("codec");
    g.throughput(Throughput::Bytes(text.len() as u64));
    g.bench_function("census", |b| b.iter(|| census([text.as_str()])));
    g.bench_function("compress", |b| b.iter(|| compress(&text, &codec)));
    g.bench_function("decompress", |b| b.iter(|| decompress(&packed, &codec).unwrap()));
    g.finish();
}

fn quadrants(c: &mut Criterion) {
    let m = ted_fixture();
    let params = SignificanceParams::for_matrix(&m, 2.0).unwrap();
    c.bench_function("classify/ted", |b| b.iter(|| classify(&m, &params).unwrap()));
    c.bench_function("sweep/ted", |b| b.iter(|| sweep(&m, &[2.0, 3.0, 5.0, 10.0, 20.0]).unwrap()));
}

criterion_group!(benches, codec, quadrants);
criterion_main!(benches);
