//! Per-language metadata: family tree, word separation and pretraining support.
//!
//! The builtin table covers every language of the FLORES-101 benchmark (101
//! translation targets plus English as the source side). A file-based registry
//! uses the same CSV layout and can override any property, e.g. to mark an
//! additional script as written without inter-word spaces.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUILTIN_CSV: &str = include_str!("../data/languages.csv");

const HEADER: [&str; 7] = [
    "iso",
    "name",
    "family1",
    "family2",
    "family3",
    "space_separated",
    "llama_supported",
];

/// One representative language per family, used for the multilingual probe set.
pub const REPRESENTATIVE_LANGUAGES: [&str; 12] = [
    "ha", "he", "mi", "ta", "af", "ro", "th", "ns", "luo", "zh", "tr", "et",
];

/// Source language of every evaluated direction.
pub const SOURCE_LANGUAGE: &str = "en";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageInfo {
    pub iso_code: String,
    pub name: String,
    pub family_l1: Option<String>,
    pub family_l2: Option<String>,
    pub family_l3: Option<String>,
    pub space_separated: bool,
    pub llama_supported: bool,
    /// Member of [`REPRESENTATIVE_LANGUAGES`].
    pub representative: bool,
}

impl LanguageInfo {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.iso_code.is_empty() {
            return Err("empty iso code".into());
        }
        if self.family_l2.is_some() && self.family_l1.is_none() {
            return Err(format!("`{}`: family2 given without family1", self.iso_code));
        }
        if self.family_l3.is_some() && self.family_l2.is_none() {
            return Err(format!("`{}`: family3 given without family2", self.iso_code));
        }
        Ok(())
    }
}

/// Immutable set of [`LanguageInfo`] keyed by ISO code.
#[derive(Debug, Clone, Default)]
pub struct LanguageRegistry {
    entries: BTreeMap<String, LanguageInfo>,
}

#[derive(Debug, Clone)]
pub enum RegistrySource<'a> {
    Builtin,
    File(&'a Path),
}

pub fn load_registry(source: RegistrySource<'_>) -> Result<LanguageRegistry> {
    match source {
        RegistrySource::Builtin => Ok(LanguageRegistry::builtin()),
        RegistrySource::File(path) => LanguageRegistry::from_reader(std::fs::File::open(path)?),
    }
}

impl LanguageRegistry {
    /// The bundled FLORES-101 table.
    pub fn builtin() -> Self {
        Self::from_reader(BUILTIN_CSV.as_bytes()).expect("bundled language table is valid")
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);

        let headers = rdr.headers()?.clone();
        if headers.iter().map(str::trim).ne(HEADER.iter().copied()) {
            return Err(Error::MalformedRow {
                line: 1,
                message: format!("expected header `{}`", HEADER.join(",")),
            });
        }

        let mut entries = BTreeMap::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let malformed = |message: String| Error::MalformedRow { line, message };

            if record.len() != HEADER.len() {
                return Err(malformed(format!(
                    "expected {} fields, found {}",
                    HEADER.len(),
                    record.len()
                )));
            }
            let opt = |i: usize| {
                let v = record[i].trim();
                (!v.is_empty()).then(|| v.to_string())
            };
            let flag = |i: usize| match record[i].trim() {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(malformed(format!(
                    "column `{}`: expected true/false, found `{other}`",
                    HEADER[i]
                ))),
            };

            let iso_code = record[0].trim().to_string();
            let info = LanguageInfo {
                representative: REPRESENTATIVE_LANGUAGES.contains(&iso_code.as_str()),
                name: record[1].trim().to_string(),
                family_l1: opt(2),
                family_l2: opt(3),
                family_l3: opt(4),
                space_separated: flag(5)?,
                llama_supported: flag(6)?,
                iso_code,
            };
            info.validate().map_err(malformed)?;

            if entries.contains_key(&info.iso_code) {
                return Err(Error::DuplicateCode { code: info.iso_code });
            }
            entries.insert(info.iso_code.clone(), info);
        }
        Ok(Self { entries })
    }

    pub fn lookup(&self, iso_code: &str) -> Result<&LanguageInfo> {
        self.entries.get(iso_code).ok_or_else(|| Error::NotFound {
            code: iso_code.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries ordered by ISO code.
    pub fn iter(&self) -> impl Iterator<Item = &LanguageInfo> {
        self.entries.values()
    }

    /// Every translation target, i.e. all entries except the source language.
    pub fn flores_targets(&self) -> impl Iterator<Item = &LanguageInfo> {
        self.iter().filter(|e| e.iso_code != SOURCE_LANGUAGE)
    }

    pub fn representatives(&self) -> impl Iterator<Item = &LanguageInfo> {
        self.iter().filter(|e| e.representative)
    }
}
