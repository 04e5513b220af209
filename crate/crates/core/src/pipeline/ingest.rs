use std::path::{Path, PathBuf};

use serde::Serialize;
use walkdir::WalkDir;

use crate::dataflow::build_def_use;
use crate::syntax::{SourceUnit, Span};

/// A file that was read but could not be used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkippedFile {
    pub path: PathBuf,
    pub error: String,
    pub span: Option<Span>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    /// Source files found, whether or not they parsed.
    pub files: usize,
    pub skipped: Vec<SkippedFile>,
    /// Paths that could not be read or walked.
    pub io_errors: Vec<(PathBuf, String)>,
}

#[derive(Clone, Debug)]
pub struct Ingested {
    /// One unit per file, ordered by path. Each unit is named by its path.
    pub units: Vec<SourceUnit>,
    pub report: IngestReport,
}

fn is_source(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "mini")
}

/// Reads every `.mini` file under `paths`. Files named directly are read
/// whatever their extension. Files that fail to lex, parse, or resolve are
/// skipped and reported; unreadable paths are reported and do not stop the
/// batch.
pub fn ingest<P: AsRef<Path>>(paths: &[P]) -> Ingested {
    let mut report = IngestReport::default();
    let mut files = Vec::new();
    for root in paths {
        let root = root.as_ref();
        if root.is_file() {
            files.push(root.to_path_buf());
            continue;
        }
        if !root.exists() {
            report.io_errors.push((root.to_path_buf(), "no such file or directory".into()));
            continue;
        }
        for entry in WalkDir::new(root).sort_by_file_name() {
            match entry {
                Ok(e) if e.file_type().is_file() && is_source(e.path()) => files.push(e.into_path()),
                Ok(_) => {}
                Err(e) => {
                    let p = e.path().map_or_else(|| root.to_path_buf(), Path::to_path_buf);
                    report.io_errors.push((p, e.to_string()));
                }
            }
        }
    }
    files.sort();
    files.dedup();

    let mut units = Vec::new();
    for path in files {
        report.files += 1;
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                report.files -= 1;
                report.io_errors.push((path, e.to_string()));
                continue;
            }
        };
        let name = path.display().to_string();
        match SourceUnit::parse(&name, &text) {
            Ok(unit) => match build_def_use(&unit.ast) {
                Ok(_) => units.push(unit),
                Err(e) => report.skipped.push(SkippedFile {
                    path,
                    error: e.to_string(),
                    span: e.span(),
                }),
            },
            Err(e) => report.skipped.push(SkippedFile {
                path,
                error: e.to_string(),
                span: Some(e.span()),
            }),
        }
    }
    Ingested { units, report }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) {
        let p = dir.join(name);
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        std::fs::write(p, text).unwrap();
    }

    #[test]
    fn valid_files_in_path_order() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "b.mini", "int g() { return 2; }");
        write(dir.path(), "a.mini", "int f() { return 1; }");
        write(dir.path(), "sub/c.mini", "int h() { return 3; }");
        write(dir.path(), "notes.txt", "not code");
        let got = ingest(&[dir.path()]);
        assert_eq!(got.units.len(), 3);
        assert!(got.report.skipped.is_empty());
        let fns: Vec<String> = got
            .units
            .iter()
            .map(|u| u.ast.node(u.ast.functions()[0]).text().unwrap().to_string())
            .collect();
        assert_eq!(fns, ["f", "g", "h"]);
    }

    #[test]
    fn parse_errors_are_skipped_with_span() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "bad.mini", "int f() { return 1 }");
        write(dir.path(), "unbound.mini", "int f() { return y; }");
        let got = ingest(&[dir.path()]);
        assert!(got.units.is_empty());
        assert_eq!(got.report.files, 2);
        assert_eq!(got.report.skipped.len(), 2);
        assert!(got.report.skipped.iter().all(|s| s.span.is_some()));
    }

    #[test]
    fn duplicates_are_kept_and_missing_paths_reported() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "one.mini", "int f() { return 1; }");
        write(dir.path(), "two.mini", "int f() { return 1; }");
        let missing = dir.path().join("missing");
        let got = ingest(&[dir.path().to_path_buf(), missing.clone()]);
        assert_eq!(got.units.len(), 2);
        assert_eq!(got.report.io_errors.len(), 1);
        assert_eq!(got.report.io_errors[0].0, missing);
    }
}
