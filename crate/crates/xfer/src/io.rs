//! CSV ingestion and emission for the corpus files and distance tables.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use xfer_core::corpus::{
    Coordinates, FeatureDescriptor, FeatureGroup, FeatureMatrix, LangCode, Language, LanguageRegistry, ScoreTable,
    Task, TransferRecord,
};
use xfer_core::distance::{Component, PairDistances, Provenance};
use xfer_core::encoding::PairDataset;

use crate::error::{Error, Location, Result};

/// A parsed CSV file: named columns and records with their line numbers.
struct Sheet<'p> {
    path: &'p Path,
    index: HashMap<String, usize>,
    rows: Vec<(u64, csv::StringRecord)>,
}

impl<'p> Sheet<'p> {
    fn read(path: &'p Path, required: &[&str], optional: &[&str]) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &bytes, required, optional)
    }

    fn parse(path: &'p Path, bytes: &[u8], required: &[&str], optional: &[&str]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(bytes);
        let headers = reader
            .headers()
            .map_err(|e| csv_error(path, &e))?
            .clone();
        if headers.is_empty() || headers.iter().all(str::is_empty) {
            return Err(Error::data(Location::file(path), "missing header row"));
        }
        let mut index = HashMap::new();
        for (i, h) in headers.iter().enumerate() {
            if !required.contains(&h) && !optional.contains(&h) {
                return Err(Error::data(
                    Location::line(path, 1),
                    format!("unexpected column {h:?}; expected {}", required.join(",")),
                ));
            }
            if index.insert(h.to_string(), i).is_some() {
                return Err(Error::data(Location::line(path, 1), format!("duplicate column {h:?}")));
            }
        }
        if let Some(missing) = required.iter().find(|r| !index.contains_key(**r)) {
            return Err(Error::data(
                Location::line(path, 1),
                format!("missing column {missing:?}; expected {}", required.join(",")),
            ));
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| csv_error(path, &e))?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec));
        }
        Ok(Sheet { path, index, rows })
    }

    fn at(&self, line: u64) -> Location {
        Location::line(self.path, line)
    }

    fn field<'r>(&self, rec: &'r csv::StringRecord, name: &str) -> &'r str {
        self.index.get(name).and_then(|&i| rec.get(i)).unwrap_or("")
    }

    fn require_rows(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::data(Location::file(self.path), "no records"));
        }
        Ok(())
    }
}

fn csv_error(path: &Path, e: &csv::Error) -> Error {
    let at = match e.position() {
        Some(p) => Location::line(path, p.line()),
        None => Location::file(path),
    };
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("malformed row: {len} fields, expected {expected_len}")
        }
        csv::ErrorKind::Utf8 { .. } => "malformed row: invalid UTF-8".to_string(),
        _ => format!("malformed row: {e}"),
    };
    Error::data(at, message)
}

fn parse_num<T: FromStr>(sheet: &Sheet, line: u64, column: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::data(sheet.at(line), format!("malformed row: {column} {raw:?} is not a number")))
}

fn parse_code(sheet: &Sheet, line: u64, raw: &str) -> Result<LangCode> {
    LangCode::new(raw).map_err(|e| Error::data(sheet.at(line), e))
}

fn known_code(sheet: &Sheet, line: u64, raw: &str, registry: Option<&LanguageRegistry>) -> Result<LangCode> {
    let code = parse_code(sheet, line, raw)?;
    if registry.is_some_and(|r| !r.contains(&code)) {
        return Err(Error::data(sheet.at(line), format!("unknown language {code}")));
    }
    Ok(code)
}

pub fn read_languages(path: &Path) -> Result<LanguageRegistry> {
    parse_languages(&Sheet::read(path, &["code", "name", "latitude", "longitude", "genealogy"], &[])?)
}

fn parse_languages(sheet: &Sheet) -> Result<LanguageRegistry> {
    sheet.require_rows()?;
    let mut registry = LanguageRegistry::new();
    for (line, rec) in &sheet.rows {
        let line = *line;
        let code = parse_code(sheet, line, sheet.field(rec, "code"))?;
        let lat = sheet.field(rec, "latitude");
        let lon = sheet.field(rec, "longitude");
        let coordinates = match (lat.is_empty(), lon.is_empty()) {
            (true, true) => None,
            (false, false) => Some(Coordinates {
                latitude: parse_num(sheet, line, "latitude", lat)?,
                longitude: parse_num(sheet, line, "longitude", lon)?,
            }),
            _ => {
                return Err(Error::data(
                    sheet.at(line),
                    "malformed row: latitude and longitude must both be given or both be empty",
                ))
            }
        };
        let genealogy: Vec<String> = sheet
            .field(rec, "genealogy")
            .split('|')
            .map(|s| s.trim().to_string())
            .collect();
        let lang = Language::new(code, sheet.field(rec, "name"), coordinates, genealogy)
            .map_err(|e| Error::data(sheet.at(line), e))?;
        registry.insert(lang).map_err(|e| Error::data(sheet.at(line), e))?;
    }
    Ok(registry)
}

/// Reads the feature catalog and the long-format values into a matrix over
/// every registry language.
pub fn read_feature_matrix(catalog: &Path, values: &Path, registry: &LanguageRegistry) -> Result<FeatureMatrix> {
    let cat = Sheet::read(catalog, &["feature_id", "name", "group", "category_count"], &["category_labels"])?;
    let vals = Sheet::read(values, &["language", "feature_id", "category"], &[])?;
    parse_feature_matrix(&cat, &vals, registry)
}

fn parse_feature_matrix(cat: &Sheet, vals: &Sheet, registry: &LanguageRegistry) -> Result<FeatureMatrix> {
    cat.require_rows()?;
    let mut features = Vec::new();
    let mut seen = HashMap::new();
    for (line, rec) in &cat.rows {
        let line = *line;
        let id = cat.field(rec, "feature_id");
        if id.is_empty() {
            return Err(Error::data(cat.at(line), "malformed row: empty feature_id"));
        }
        if let Some(first) = seen.insert(id.to_string(), line) {
            return Err(Error::data(cat.at(line), format!("duplicate feature id {id} (first on line {first})")));
        }
        let group = FeatureGroup::from_str(cat.field(rec, "group")).map_err(|e| Error::data(cat.at(line), e))?;
        let count: u32 = parse_num(cat, line, "category_count", cat.field(rec, "category_count"))?;
        let raw_labels = cat.field(rec, "category_labels");
        let labels: Vec<&str> = if raw_labels.is_empty() {
            Vec::new()
        } else {
            raw_labels.split(';').map(str::trim).collect()
        };
        if labels.len() > count as usize {
            return Err(Error::data(
                cat.at(line),
                format!("feature {id}: {} labels for {count} categories", labels.len()),
            ));
        }
        let desc = FeatureDescriptor::with_count(id, cat.field(rec, "name"), group, count, &labels)
            .map_err(|e| Error::data(cat.at(line), e))?;
        features.push(desc);
    }
    let languages: Vec<LangCode> = registry.codes().cloned().collect();
    let mut matrix = FeatureMatrix::new(languages, features).map_err(|e| Error::data(Location::file(cat.path), e))?;
    for (line, rec) in &vals.rows {
        let line = *line;
        let lang = known_code(vals, line, vals.field(rec, "language"), Some(registry))?;
        let fid = vals.field(rec, "feature_id");
        let category: u32 = parse_num(vals, line, "category", vals.field(rec, "category"))?;
        matrix.set(&lang, fid, category).map_err(|e| Error::data(vals.at(line), e))?;
    }
    Ok(matrix)
}

/// Reads transfer scores. Languages are checked against `registry` when
/// given.
pub fn read_scores(path: &Path, registry: Option<&LanguageRegistry>) -> Result<ScoreTable> {
    parse_scores(&Sheet::read(path, &["task", "source", "target", "accuracy"], &[])?, registry)
}

fn parse_scores(sheet: &Sheet, registry: Option<&LanguageRegistry>) -> Result<ScoreTable> {
    sheet.require_rows()?;
    let mut records = Vec::with_capacity(sheet.rows.len());
    let mut seen: HashMap<(Task, LangCode, LangCode), u64> = HashMap::new();
    for (line, rec) in &sheet.rows {
        let line = *line;
        let task = Task::from_str(sheet.field(rec, "task")).map_err(|e| Error::data(sheet.at(line), e))?;
        let source = known_code(sheet, line, sheet.field(rec, "source"), registry)?;
        let target = known_code(sheet, line, sheet.field(rec, "target"), registry)?;
        let accuracy: f64 = parse_num(sheet, line, "accuracy", sheet.field(rec, "accuracy"))?;
        if let Some(first) = seen.insert((task, source.clone(), target.clone()), line) {
            return Err(Error::data(
                sheet.at(line),
                format!("duplicate record for ({task}, {source}, {target}) (first on line {first})"),
            ));
        }
        let record = TransferRecord::new(task, source, target, accuracy).map_err(|e| Error::data(sheet.at(line), e))?;
        records.push(record);
    }
    ScoreTable::new(records).map_err(|e| Error::data(Location::file(sheet.path), e))
}

const DISTANCE_COLUMNS: [&str; 5] = ["source", "target", "syntactic", "geographic", "genetic"];

/// Reads precomputed distances. Empty cells leave that component unset.
pub fn read_distances(path: &Path, registry: Option<&LanguageRegistry>) -> Result<PairDistances> {
    parse_distances(&Sheet::read(path, &DISTANCE_COLUMNS, &[])?, registry)
}

fn parse_distances(sheet: &Sheet, registry: Option<&LanguageRegistry>) -> Result<PairDistances> {
    let mut out = PairDistances::new();
    for (line, rec) in &sheet.rows {
        let line = *line;
        let a = known_code(sheet, line, sheet.field(rec, "source"), registry)?;
        let b = known_code(sheet, line, sheet.field(rec, "target"), registry)?;
        for component in Component::ALL {
            let raw = sheet.field(rec, component.as_str());
            if raw.is_empty() {
                continue;
            }
            let v: f64 = parse_num(sheet, line, component.as_str(), raw)?;
            out.insert(&a, &b, component, v, Provenance::Loaded)
                .map_err(|e| Error::data(sheet.at(line), e))?;
        }
    }
    Ok(out)
}

fn csv_line(fields: &[&str]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("fields are UTF-8")
}

/// Formats a float with a fixed number of decimals, without a negative zero.
pub fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Shortest text that parses back to exactly `v`.
fn exact(v: f64) -> String {
    format!("{v}")
}

pub fn languages_csv(registry: &LanguageRegistry) -> String {
    let mut out = csv_line(&["code", "name", "latitude", "longitude", "genealogy"]);
    for l in registry.iter() {
        let (lat, lon) = match l.coordinates {
            Some(c) => (exact(c.latitude), exact(c.longitude)),
            None => (String::new(), String::new()),
        };
        out.push_str(&csv_line(&[l.code.as_str(), &l.name, &lat, &lon, &l.genealogy.join("|")]));
    }
    out
}

pub fn features_csv(matrix: &FeatureMatrix) -> String {
    let mut out = csv_line(&["feature_id", "name", "group", "category_count", "category_labels"]);
    for f in matrix.features() {
        let count = f.categories.keys().max().copied().unwrap_or(0);
        let labels: Vec<String> = (1..=count)
            .map(|c| f.label(c).map_or_else(|| format!("category {c}"), String::from))
            .collect();
        out.push_str(&csv_line(&[&f.id, &f.name, f.group.label(), &count.to_string(), &labels.join(";")]));
    }
    out
}

pub fn values_csv(matrix: &FeatureMatrix) -> String {
    let mut out = csv_line(&["language", "feature_id", "category"]);
    for (li, lang) in matrix.languages().iter().enumerate() {
        for (fi, f) in matrix.features().iter().enumerate() {
            if let Some(c) = matrix.get(li, fi) {
                out.push_str(&csv_line(&[lang.as_str(), &f.id, &c.to_string()]));
            }
        }
    }
    out
}

pub fn scores_csv(scores: &ScoreTable) -> String {
    let mut out = csv_line(&["task", "source", "target", "accuracy"]);
    for r in scores.records() {
        out.push_str(&csv_line(&[r.task.as_str(), r.source.as_str(), r.target.as_str(), &exact(r.accuracy)]));
    }
    out
}

/// Distance table with 12 decimals, one row per unordered pair in the order
/// stored; missing components are left empty.
pub fn distances_csv(distances: &PairDistances) -> String {
    let mut out = csv_line(&DISTANCE_COLUMNS);
    for (a, b, d) in distances.pairs() {
        let cells: Vec<String> = Component::ALL
            .iter()
            .map(|&c| d.get(c).map_or_else(String::new, |m| fixed(m.value, 12)))
            .collect();
        out.push_str(&csv_line(&[a.as_str(), b.as_str(), &cells[0], &cells[1], &cells[2]]));
    }
    out
}

/// Provenance of each stored component, for the distance report.
pub fn distance_provenance(distances: &PairDistances) -> BTreeMap<Component, (usize, usize)> {
    let mut counts = BTreeMap::new();
    for (_, _, d) in distances.pairs() {
        for c in Component::ALL {
            if let Some(m) = d.get(c) {
                let e = counts.entry(c).or_insert((0, 0));
                match m.provenance {
                    Provenance::Computed => e.0 += 1,
                    Provenance::Loaded => e.1 += 1,
                }
            }
        }
    }
    counts
}

/// Design matrix with canonical column names, pair keys and the target.
pub fn dataset_csv(dataset: &PairDataset) -> String {
    let mut header = vec!["task".to_string(), "source".into(), "target".into()];
    header.extend(dataset.column_names());
    header.push("accuracy".into());
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = csv_line(&refs);
    for (r, pair) in dataset.pairs().iter().enumerate() {
        let mut line = format!("{},{},{}", pair.task.as_str(), pair.source, pair.target);
        for v in dataset.row(r) {
            let _ = write!(line, ",{}", exact(*v));
        }
        let _ = writeln!(line, ",{}", exact(dataset.target()[r]));
        out.push_str(&line);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sheet<'p>(path: &'p Path, text: &str, required: &[&str], optional: &[&str]) -> Result<Sheet<'p>> {
        Sheet::parse(path, text.as_bytes(), required, optional)
    }

    fn langs(text: &str) -> Result<LanguageRegistry> {
        let p = Path::new("languages.csv");
        parse_languages(&sheet(p, text, &["code", "name", "latitude", "longitude", "genealogy"], &[])?)
    }

    const HEADER: &str = "code,name,latitude,longitude,genealogy\n";

    #[test]
    fn parses_language_rows() {
        let r = langs(&format!("{HEADER}fr,French,48.0,2.0,Indo-European|Italic|Romance\n")).unwrap();
        let fr = r.get_str("fr").unwrap();
        assert_eq!(fr.genealogy.len(), 3);
        assert_eq!(fr.coordinates.unwrap().latitude, 48.0);
    }

    #[test]
    fn language_errors_carry_line_numbers() {
        let dup = langs(&format!("{HEADER}de,German,52,13,IE\nde,German,52,13,IE\n")).unwrap_err();
        assert_eq!(dup.to_string(), "languages.csv:3: duplicate language code de");
        let lat = langs(&format!("{HEADER}xx,X,95.0,0,Iso\n")).unwrap_err();
        assert!(lat.to_string().starts_with("languages.csv:2: coordinates out of range"), "{lat}");
        let short = langs(&format!("{HEADER}xx,X,5.0\n")).unwrap_err();
        assert!(short.to_string().contains("malformed row"), "{short}");
        let bad = langs(&format!("{HEADER}xx,X,north,0,Iso\n")).unwrap_err();
        assert!(bad.to_string().contains("latitude \"north\" is not a number"), "{bad}");
        let empty = langs(HEADER).unwrap_err();
        assert_eq!(empty.to_string(), "languages.csv: no records");
    }

    #[test]
    fn header_is_checked() {
        let e = langs("code,name,lat,longitude,genealogy\nfr,French,1,2,IE\n").unwrap_err();
        assert!(e.to_string().contains("unexpected column \"lat\""), "{e}");
    }

    fn matrix(values: &str) -> Result<FeatureMatrix> {
        let reg = langs(&format!("{HEADER}bg,Bulgarian,42,25,IE|Slavic\nta,Tamil,11,78,Dravidian\n")).unwrap();
        let cp = Path::new("features.csv");
        let vp = Path::new("values.csv");
        let cat = sheet(
            cp,
            "feature_id,name,group,category_count,category_labels\n90A,Relative clauses,Word Order,7,NRel;RelN\n45A,Politeness,Nominal Categories,4,\n",
            &["feature_id", "name", "group", "category_count"],
            &["category_labels"],
        )?;
        let vals = sheet(vp, values, &["language", "feature_id", "category"], &[])?;
        parse_feature_matrix(&cat, &vals, &reg)
    }

    #[test]
    fn feature_matrix_examples() {
        let m = matrix("language,feature_id,category\nbg,90A,2\n").unwrap();
        assert_eq!(m.value(&LangCode::new("bg").unwrap(), "90A"), Some(2));
        assert_eq!(m.value(&LangCode::new("ta").unwrap(), "45A"), None);
        assert_eq!(m.feature("90A").unwrap().label(2), Some("RelN"));
        assert_eq!(m.feature("90A").unwrap().label(7), Some("category 7"));
        let e = matrix("language,feature_id,category\nbg,90A,9\n").unwrap_err();
        assert!(e.to_string().starts_with("values.csv:2: feature 90A: category 9"), "{e}");
        let e = matrix("language,feature_id,category\nbg,91A,1\n").unwrap_err();
        assert!(e.to_string().contains("unknown feature id 91A"), "{e}");
        let e = matrix("language,feature_id,category\nxx,90A,1\n").unwrap_err();
        assert!(e.to_string().contains("unknown language xx"), "{e}");
    }

    fn scores(text: &str) -> Result<ScoreTable> {
        let p = Path::new("scores.csv");
        parse_scores(&sheet(p, text, &["task", "source", "target", "accuracy"], &[])?, None)
    }

    #[test]
    fn score_examples() {
        let t = scores("task,source,target,accuracy\nPOS,en,af,0.884\n").unwrap();
        assert_eq!(t.len(), 1);
        let e = scores("task,source,target,accuracy\nPOS,en,af,1.2\n").unwrap_err();
        assert!(e.to_string().contains("outside [0, 1]"), "{e}");
        let e = scores("task,source,target,accuracy\nNER,fi,et,0.5\nNER,fi,et,0.6\n").unwrap_err();
        assert_eq!(e.to_string(), "scores.csv:3: duplicate record for (NER, fi, et) (first on line 2)");
        let e = scores("task,source,target,accuracy\n").unwrap_err();
        assert_eq!(e.to_string(), "scores.csv: no records");
        let e = scores("task,source,target,accuracy\nQA,en,af,0.5\n").unwrap_err();
        assert!(e.to_string().contains("unknown task"), "{e}");
    }

    #[test]
    fn distance_rows_are_symmetric_and_bounded() {
        let p = Path::new("distances.csv");
        let parse = |text: &str| parse_distances(&sheet(p, text, &DISTANCE_COLUMNS, &[])?, None);
        let d = parse("source,target,syntactic,geographic,genetic\nfr,es,0.12,0.03,0.25\n").unwrap();
        let (fr, es) = (LangCode::new("fr").unwrap(), LangCode::new("es").unwrap());
        assert_eq!(d.get(&es, &fr, Component::Syntactic).unwrap(), 0.12);
        assert_eq!(d.get(&fr, &es, Component::Genetic).unwrap(), 0.25);
        let e = parse("source,target,syntactic,geographic,genetic\nfr,es,1.3,0.03,0.25\n").unwrap_err();
        assert!(e.to_string().starts_with("distances.csv:2:"), "{e}");
        let partial = parse("source,target,syntactic,geographic,genetic\nfr,es,0.5,,\n").unwrap();
        assert!(partial.get(&fr, &es, Component::Geographic).is_err());
    }

    #[test]
    fn fixed_never_prints_negative_zero() {
        assert_eq!(fixed(-0.0000001, 6), "0.000000");
        assert_eq!(fixed(-0.5, 2), "-0.50");
    }
}
