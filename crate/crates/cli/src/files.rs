// SPDX-License-Identifier: MIT OR Apache-2.0

//! Delimited input and output files. Time indices are 1-based everywhere.
//!
//! * events: header `time`, one index per row;
//! * detections: header `time` (method named after the file stem) or
//!   `time,method`;
//! * series: header `time,value`, times `1..=n` in order.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use softed_core::detectors::SeriesData;
use softed_core::{
    validate_instance, DuplicateWarning, EvaluationInstance, EventSet, RawDetections, Timeline,
};

use crate::error::{CliError, CliResult};

/// Where one evaluation instance comes from.
#[derive(Debug, Clone, Default)]
pub struct InstanceSources {
    pub name: Option<String>,
    pub events: PathBuf,
    pub detections: Vec<PathBuf>,
    pub series: Option<PathBuf>,
    pub length: Option<usize>,
    /// Method order; listed methods missing from the files have no detections.
    pub methods: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedInstance {
    pub name: String,
    pub instance: EvaluationInstance,
    pub warnings: Vec<DuplicateWarning>,
}

fn open(path: &Path) -> CliResult<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.kind() {
        csv::ErrorKind::Io(_) => match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            _ => unreachable!(),
        },
        _ => {
            let line = e
                .position()
                .map(|p| format!(" line {}", p.line()))
                .unwrap_or_default();
            CliError::validation(format!("{}:{line}: {e}", path.display()))
        }
    }
}

fn headers(path: &Path, reader: &mut csv::Reader<fs::File>) -> CliResult<Vec<String>> {
    Ok(reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect())
}

fn unknown_header(path: &Path, found: &[String], expected: &str) -> CliError {
    CliError::validation(format!(
        "{}: unknown header {:?}, expected {expected}",
        path.display(),
        found.join(",")
    ))
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: u64,
    column: &str,
    raw: &str,
) -> CliResult<T> {
    raw.parse().map_err(|_| {
        CliError::validation(format!(
            "{}: line {line}: malformed {column} {raw:?}",
            path.display()
        ))
    })
}

fn rows(
    path: &Path,
    reader: &mut csv::Reader<fs::File>,
) -> CliResult<Vec<(u64, csv::StringRecord)>> {
    reader
        .records()
        .map(|r| {
            let r = r.map_err(|e| csv_error(path, e))?;
            let line = r.position().map_or(0, |p| p.line());
            Ok((line, r))
        })
        .collect()
}

pub fn read_events(path: &Path) -> CliResult<Vec<i64>> {
    let mut reader = open(path)?;
    let h = headers(path, &mut reader)?;
    if h != ["time"] {
        return Err(unknown_header(path, &h, "\"time\""));
    }
    rows(path, &mut reader)?
        .into_iter()
        .map(|(line, r)| parse_field(path, line, "time", &r[0]))
        .collect()
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "detections".to_string())
}

/// Detection sets of one file, in order of first appearance.
pub fn read_detections(path: &Path) -> CliResult<Vec<RawDetections>> {
    let mut reader = open(path)?;
    let h = headers(path, &mut reader)?;
    let with_method = match h.as_slice() {
        [t] if t == "time" => false,
        [t, m] if t == "time" && m == "method" => true,
        _ => return Err(unknown_header(path, &h, "\"time\" or \"time,method\"")),
    };
    let stem = file_stem(path);
    let mut sets: Vec<RawDetections> = Vec::new();
    for (line, r) in rows(path, &mut reader)? {
        let time: i64 = parse_field(path, line, "time", &r[0])?;
        let method = if with_method { &r[1] } else { stem.as_str() };
        match sets.iter_mut().find(|s| s.method == method) {
            Some(s) => s.times.push(time),
            None => sets.push(RawDetections::new(method, vec![time])),
        }
    }
    if sets.is_empty() && !with_method {
        // A method that detected nothing.
        sets.push(RawDetections::new(stem, Vec::new()));
    }
    Ok(sets)
}

pub fn read_series(path: &Path) -> CliResult<SeriesData> {
    let mut reader = open(path)?;
    let h = headers(path, &mut reader)?;
    if h != ["time", "value"] {
        return Err(unknown_header(path, &h, "\"time,value\""));
    }
    let mut values = Vec::new();
    for (line, r) in rows(path, &mut reader)? {
        let time: usize = parse_field(path, line, "time", &r[0])?;
        if time != values.len() + 1 {
            return Err(CliError::validation(format!(
                "{}: line {line}: expected time {}, got {time}",
                path.display(),
                values.len() + 1
            )));
        }
        let value: f64 = parse_field(path, line, "value", &r[1])?;
        values.push(value);
    }
    SeriesData::new(values).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

/// Merges detection files; a method may not appear in two files.
fn merge_detections(paths: &[PathBuf]) -> CliResult<Vec<RawDetections>> {
    let mut all: Vec<RawDetections> = Vec::new();
    for path in paths {
        for set in read_detections(path)? {
            if all.iter().any(|s| s.method == set.method) {
                return Err(CliError::validation(format!(
                    "{}: method {:?} already defined by another detections file",
                    path.display(),
                    set.method
                )));
            }
            all.push(set);
        }
    }
    Ok(all)
}

pub fn load_instance(sources: &InstanceSources) -> CliResult<LoadedInstance> {
    let events = read_events(&sources.events)?;
    let detections = order_methods(merge_detections(&sources.detections)?, &sources.methods);
    let series_length = sources
        .series
        .as_deref()
        .map(read_series)
        .transpose()?
        .map(|s| s.len());
    let length = match (series_length, sources.length) {
        (Some(s), Some(l)) if s != l => {
            return Err(CliError::validation(format!(
                "series has {s} observations but --length is {l}"
            )))
        }
        (Some(s), _) => s,
        (None, Some(l)) => l,
        (None, None) => return Err(CliError::validation("timeline length unspecified")),
    };
    let name = sources
        .name
        .clone()
        .unwrap_or_else(|| default_name(&sources.events));
    let timeline = Timeline::new(length)?.with_origin(name.clone());
    let (instance, warnings) = validate_instance(timeline, &events, detections)?;
    Ok(LoadedInstance {
        name,
        instance,
        warnings,
    })
}

fn order_methods(mut found: Vec<RawDetections>, declared: &[String]) -> Vec<RawDetections> {
    let mut ordered = Vec::with_capacity(found.len().max(declared.len()));
    for name in declared {
        match found.iter().position(|s| &s.method == name) {
            Some(i) => ordered.push(found.remove(i)),
            None => ordered.push(RawDetections::new(name.clone(), Vec::new())),
        }
    }
    ordered.extend(found);
    ordered
}

/// Name of the directory holding `events`, or `instance`.
fn default_name(events: &Path) -> String {
    events
        .parent()
        .and_then(Path::file_name)
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".to_string())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceManifest {
    name: Option<String>,
    length: Option<usize>,
    #[serde(default)]
    methods: Vec<String>,
}

pub const EVENTS_FILE: &str = "events.csv";
pub const SERIES_FILE: &str = "series.csv";
pub const MANIFEST_FILE: &str = "instance.toml";

/// Reads an instance directory: `events.csv`, every `detections*.csv`,
/// and `series.csv` and/or `instance.toml` for the timeline length.
pub fn load_instance_dir(dir: &Path) -> CliResult<LoadedInstance> {
    let mut detections: Vec<PathBuf> = list_dir(dir)?
        .into_iter()
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("detections") && n.ends_with(".csv"))
        })
        .collect();
    detections.sort();
    if detections.is_empty() {
        return Err(CliError::validation(format!(
            "{}: no detections*.csv file",
            dir.display()
        )));
    }

    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest: InstanceManifest = if manifest_path.is_file() {
        let text =
            fs::read_to_string(&manifest_path).map_err(|e| CliError::io(&manifest_path, e))?;
        toml::from_str(&text)
            .map_err(|e| CliError::validation(format!("{}: {e}", manifest_path.display())))?
    } else {
        InstanceManifest::default()
    };
    let series = dir.join(SERIES_FILE);

    load_instance(&InstanceSources {
        name: Some(manifest.name.unwrap_or_else(|| {
            dir.file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "instance".to_string())
        })),
        events: dir.join(EVENTS_FILE),
        detections,
        series: series.is_file().then_some(series),
        length: manifest.length,
        methods: manifest.methods,
    })
}

/// Entries of `dir`, sorted by path.
pub fn list_dir(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| CliError::io(dir, e)))
        .collect::<CliResult<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| CliError::io(path, e))
}

pub fn events_csv(events: &EventSet) -> String {
    let mut out = String::from("time\n");
    for t in events.times() {
        out.push_str(&format!("{t}\n"));
    }
    out
}

pub fn detections_csv(sets: &[(&str, &[usize])]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["time", "method"]).expect("in-memory write");
    for (method, times) in sets {
        for t in *times {
            w.write_record([t.to_string().as_str(), method])
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn series_csv(series: &SeriesData) -> String {
    let mut out = String::from("time,value\n");
    for (i, v) in series.values().iter().enumerate() {
        out.push_str(&format!("{},{v}\n", i + 1));
    }
    out
}

/// Writes an instance directory that [`load_instance_dir`] reads back.
pub fn write_instance_dir(dir: &Path, name: &str, instance: &EvaluationInstance) -> CliResult<()> {
    write_file(
        &dir.join(EVENTS_FILE),
        events_csv(instance.events()).as_bytes(),
    )?;
    let sets: Vec<(&str, &[usize])> = instance
        .detections()
        .iter()
        .map(|d| (d.method(), d.times()))
        .collect();
    write_file(
        &dir.join("detections.csv"),
        detections_csv(&sets).as_bytes(),
    )?;
    let methods: Vec<String> = instance.methods().map(toml_string).collect();
    let manifest = format!(
        "name = {}\nlength = {}\nmethods = [{}]\n",
        toml_string(name),
        instance.timeline().length(),
        methods.join(", ")
    );
    write_file(&dir.join(MANIFEST_FILE), manifest.as_bytes())
}

fn toml_string(s: &str) -> String {
    // JSON string escapes are valid TOML basic-string escapes.
    serde_json::to_string(s).expect("string serializes")
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    write_file(path, text.as_bytes())
}
