//! JSON catalog of quotient records: schema, loading with validation, and
//! serialization back to the on-disk layout.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::parse_rat;
use crate::atkin_lehner::{key_for, span};
use crate::cm::{Parity, QuotientMap};
use crate::curve::{build_model, CurveId, CurveModel, ModelKind, RatPoint};
use crate::error::{Error, Result};
use crate::poly::Poly;

pub const CATALOG_ENV: &str = "SHIMURA_CATALOG";

/// `SHIMURA_CATALOG` if set, else the catalog shipped with the sources.
pub fn default_catalog_dir() -> PathBuf {
    match std::env::var_os(CATALOG_ENV) {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../catalog")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectedN {
    Finite(u64),
    Infinite,
}

impl Serialize for ExpectedN {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExpectedN::Finite(n) => s.serialize_u64(*n),
            ExpectedN::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExpectedN {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) if s == "inf" => Ok(ExpectedN::Infinite),
            serde_json::Value::Number(n) => {
                n.as_u64().map(ExpectedN::Finite).ok_or_else(|| D::Error::custom("expected_n must be a count"))
            }
            other => Err(D::Error::custom(format!("bad expected_n {}", other))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelData {
    pub kind: ModelKind,
    pub h: Vec<i64>,
    pub f: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmLabel {
    pub point: String,
    pub cm: bool,
    pub delta_k: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotientMapData {
    pub source: String,
    pub parity: Parity,
    pub mobius: [i64; 4],
    pub scale: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

/// One record exactly as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordData {
    #[serde(rename = "D")]
    pub d: u64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "W")]
    pub w: Vec<u64>,
    pub genus: u32,
    pub model: Option<ModelData>,
    pub expected_points: Vec<String>,
    pub expected_n: ExpectedN,
    pub rank: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_source: Option<String>,
    pub cm_labels: Vec<CmLabel>,
    pub hasse_violation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient_map: Option<QuotientMapData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
}

#[derive(Clone, Debug)]
pub struct CatalogRecord {
    pub data: RecordData,
    pub id: CurveId,
    pub model: Option<CurveModel>,
    pub expected: Vec<RatPoint>,
    pub quotient_map: Option<QuotientMap>,
}

impl CatalogRecord {
    pub fn key(&self) -> String {
        self.id.to_string()
    }

    /// The single Atkin-Lehner index for a quotient by one involution.
    pub fn single_involution(&self) -> Option<u64> {
        match self.id.w.as_slice() {
            [m] => Some(*m),
            _ => None,
        }
    }

    pub fn is_untranscribed(&self) -> bool {
        self.data.status.as_deref() == Some("untranscribed")
    }
}

#[derive(Clone, Debug)]
pub struct CatalogFile {
    pub path: PathBuf,
    pub records: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Catalog {
    pub dir: PathBuf,
    pub records: Vec<CatalogRecord>,
    pub files: Vec<CatalogFile>,
    index: HashMap<String, usize>,
}

impl Catalog {
    pub fn get(&self, key: &str) -> Result<&CatalogRecord> {
        let id: CurveId = key.parse()?;
        self.index
            .get(&id.to_string())
            .map(|&i| &self.records[i])
            .ok_or_else(|| Error::UnknownCurve(key.to_string()))
    }

    /// Distinct `(D, N)` levels in catalog order.
    pub fn levels(&self) -> Vec<(u64, u64)> {
        let mut out: Vec<(u64, u64)> = Vec::new();
        for r in &self.records {
            if !out.contains(&(r.id.d, r.id.n)) {
                out.push((r.id.d, r.id.n));
            }
        }
        out
    }

    pub fn block(&self, d: u64, n: u64) -> Vec<&CatalogRecord> {
        self.records.iter().filter(|r| r.id.d == d && r.id.n == n).collect()
    }
}

fn record_err(id: &str, msg: impl Into<String>) -> Error {
    Error::Record { id: id.to_string(), msg: msg.into() }
}

fn validate(data: RecordData, fallback: &str) -> Result<CatalogRecord> {
    let id = CurveId::new(data.d, data.n, data.w.clone()).map_err(|e| record_err(fallback, e.to_string()))?;
    let key = id.to_string();
    let err = |m: String| record_err(&key, m);
    if span(&data.w).len() != 1 << data.w.len() {
        return Err(err("W generators are not independent".into()));
    }
    let model = match &data.model {
        None => None,
        Some(m) => {
            let model = build_model(Poly::from_i64(&m.h), Poly::from_i64(&m.f), id.clone(), Some(m.kind))
                .map_err(|e| err(e.to_string()))?;
            if model.genus != data.genus as usize {
                return Err(err(format!("genus {} recorded, model has genus {}", data.genus, model.genus)));
            }
            Some(model)
        }
    };
    let expected: Vec<RatPoint> = data
        .expected_points
        .iter()
        .map(|s| s.parse::<RatPoint>())
        .collect::<Result<_>>()
        .map_err(|e| err(e.to_string()))?;
    if !expected.is_empty() {
        if data.expected_n != ExpectedN::Finite(expected.len() as u64) {
            return Err(err("expected_points disagrees with expected_n".into()));
        }
        let Some(m) = &model else {
            return Err(err("expected points without a model".into()));
        };
        if let Some(p) = expected.iter().find(|p| !m.evaluate(p)) {
            return Err(err(format!("expected point {} is not on the model", p)));
        }
    }
    for l in &data.cm_labels {
        if !data.expected_points.contains(&l.point) {
            return Err(err(format!("CM label for unknown point {}", l.point)));
        }
        if l.cm == l.delta_k.is_empty() {
            return Err(err(format!("CM label for {} is inconsistent", l.point)));
        }
    }
    if let Some(s) = &data.status {
        if s != "untranscribed" {
            return Err(err(format!("unknown status {:?}", s)));
        }
    }
    Ok(CatalogRecord { data, id, model, expected, quotient_map: None })
}

fn file_sort_key(path: &Path) -> (u64, u64) {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    let mut it = stem.split('_').map(|t| t.parse::<u64>().unwrap_or(u64::MAX));
    (it.next().unwrap_or(u64::MAX), it.next().unwrap_or(u64::MAX))
}

/// Loads `dir/curves/*.json`, validating every record and resolving quotient maps.
pub fn load_catalog(dir: &Path) -> Result<Catalog> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir.join("curves"))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort_by_key(|p| (file_sort_key(p), p.clone()));
    let mut records = Vec::new();
    let mut files = Vec::new();
    let mut index = HashMap::new();
    for path in paths {
        let name = path.display().to_string();
        let text = fs::read_to_string(&path)?;
        let raw: Vec<serde_json::Value> =
            serde_json::from_str(&text).map_err(|e| record_err(&name, e.to_string()))?;
        let mut idx = Vec::new();
        for (i, v) in raw.into_iter().enumerate() {
            let fallback = format!("{}#{}", name, i);
            let guess = match (
                v.get("D").and_then(|x| x.as_u64()),
                v.get("N").and_then(|x| x.as_u64()),
                v.get("W").and_then(|x| serde_json::from_value::<Vec<u64>>(x.clone()).ok()),
            ) {
                (Some(d), Some(n), Some(w)) => key_for(d, n, &w),
                _ => fallback.clone(),
            };
            let data: RecordData = serde_json::from_value(v).map_err(|e| record_err(&guess, e.to_string()))?;
            let rec = validate(data, &fallback)?;
            let key = rec.key();
            if index.insert(key.clone(), records.len()).is_some() {
                return Err(record_err(&key, "duplicate id"));
            }
            idx.push(records.len());
            records.push(rec);
        }
        files.push(CatalogFile { path, records: idx });
    }
    for i in 0..records.len() {
        let Some(md) = records[i].data.quotient_map.clone() else { continue };
        let key = records[i].key();
        let src_id: CurveId = md.source.parse().map_err(|e: Error| record_err(&key, e.to_string()))?;
        let src = index
            .get(&src_id.to_string())
            .and_then(|&j| records[j].model.clone())
            .ok_or_else(|| record_err(&key, format!("map source {} has no model", md.source)))?;
        let target = records[i].model.clone().ok_or_else(|| record_err(&key, "map target has no model"))?;
        let scale = parse_rat(&md.scale).map_err(|e| record_err(&key, e.to_string()))?;
        let qm = QuotientMap::new(&src, &target, md.parity, md.mobius, scale)
            .map_err(|e| record_err(&key, e.to_string()))?;
        records[i].quotient_map = Some(qm);
    }
    Ok(Catalog { dir: dir.to_path_buf(), records, files, index })
}

/// Serializes records in the on-disk layout.
pub fn serialize_records(records: &[&RecordData]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(records)?;
    s.push('\n');
    Ok(s)
}

/// Canonical JSON value of a catalog file for comparison.
pub fn normalize(text: &str) -> Result<serde_json::Value> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Catalog {
        load_catalog(&default_catalog_dir()).unwrap()
    }

    #[test]
    fn loads_and_indexes() {
        let c = catalog();
        let r = c.get("38.1.19").unwrap();
        assert_eq!((r.data.genus, r.data.expected_n), (1, ExpectedN::Finite(3)));
        assert!(r.quotient_map.is_some());
        assert_eq!(c.block(26, 1).len(), 5);
        assert!(c.get("38.1.7").is_err());
        assert!(c.get("14.3.1").is_ok());
    }

    #[test]
    fn round_trip() {
        let c = catalog();
        for f in &c.files {
            let text = fs::read_to_string(&f.path).unwrap();
            let recs: Vec<&RecordData> = f.records.iter().map(|&i| &c.records[i].data).collect();
            let out = serialize_records(&recs).unwrap();
            assert_eq!(normalize(&out).unwrap(), normalize(&text).unwrap(), "{}", f.path.display());
        }
    }

    #[test]
    fn ids_round_trip() {
        for r in &catalog().records {
            let back: CurveId = r.key().parse().unwrap();
            assert_eq!(back, r.id);
        }
    }

    #[test]
    fn malformed_record_names_id() {
        let dir = std::env::temp_dir().join(format!("shimura-bad-{}", std::process::id()));
        fs::create_dir_all(dir.join("curves")).unwrap();
        let text = r#"[{"D": 26, "N": 1, "W": [13], "genus": 1,
            "model": {"kind": "weierstrass", "h": [1, 1], "f": [-8, "x", 0, 1]},
            "expected_points": [], "expected_n": 3, "rank": 0, "cm_labels": [], "hasse_violation": false}]"#;
        fs::write(dir.join("curves/26_1.json"), text).unwrap();
        let e = load_catalog(&dir).unwrap_err().to_string();
        fs::remove_dir_all(&dir).unwrap();
        assert!(e.contains("26.1.13"), "{}", e);
    }
}
