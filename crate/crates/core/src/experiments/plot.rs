use std::fs;
use std::io::Write;
use std::path::Path;

use super::run::{RunManifest, SeriesRole};
use super::ExperimentError;

pub const PLOT_HEADER: &str = "preset,scheme,formulation,h,t,value";

/// Write every successful series of `manifest` as long-format CSV rows.
/// Series files are resolved relative to `base_dir`. The value column holds
/// the original variable `x`.
pub fn emit_plot_data(
    manifest: &RunManifest,
    base_dir: &Path,
    out: &mut impl Write,
) -> Result<(), ExperimentError> {
    let io = |e| ExperimentError::io(base_dir, e);
    writeln!(out, "{PLOT_HEADER}").map_err(io)?;
    let preset = manifest.config.preset_name();
    for s in &manifest.series {
        let Some(file) = &s.file else { continue };
        let path = base_dir.join(file);
        if !path.exists() {
            return Err(ExperimentError::MissingFile(path));
        }
        let text = fs::read_to_string(&path).map_err(|e| ExperimentError::io(&path, e))?;
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
        let x_col = header
            .iter()
            .position(|c| *c == "x")
            .ok_or_else(|| ExperimentError::Config(format!("{}: no `x` column", path.display())))?;
        let formulation = match s.role {
            SeriesRole::Reference => "reference",
            SeriesRole::Run => s.formulation.name(),
        };
        for line in lines.filter(|l| !l.is_empty()) {
            let cols: Vec<&str> = line.split(',').collect();
            let (Some(t), Some(v)) = (cols.first(), cols.get(x_col)) else {
                return Err(ExperimentError::Config(format!("{}: short row `{line}`", path.display())));
            };
            writeln!(out, "{preset},{},{formulation},{},{t},{v}", s.scheme, s.h).map_err(io)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{presets::resolve_preset, run::run_experiment};

    #[test]
    fn rows_cover_every_series() {
        let dir = tempfile::tempdir().unwrap();
        let m = run_experiment(&resolve_preset("fig1a").unwrap(), dir.path()).unwrap();
        let mut buf = Vec::new();
        emit_plot_data(&m, dir.path(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(PLOT_HEADER));
        let rows: Vec<&str> = lines.collect();
        // reference at 0.001 on [0, 13] plus two runs at 0.13
        assert_eq!(rows.len(), 13001 + 2 * 101);
        assert!(rows[0].starts_with("fig1a,midpoint,reference,0.001,0,0.2"));
        assert!(rows.iter().any(|r| r.starts_with("fig1a,euler,original,0.13,")));
    }

    #[test]
    fn empty_manifest_gives_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = run_experiment(&resolve_preset("fig1a").unwrap(), dir.path()).unwrap();
        m.series.clear();
        let mut buf = Vec::new();
        emit_plot_data(&m, dir.path(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{PLOT_HEADER}\n"));
    }

    #[test]
    fn missing_file_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let m = run_experiment(&resolve_preset("fig1a").unwrap(), dir.path()).unwrap();
        fs::remove_file(dir.path().join("reference.csv")).unwrap();
        let err = emit_plot_data(&m, dir.path(), &mut Vec::new()).unwrap_err();
        assert!(matches!(err, ExperimentError::MissingFile(_)));
    }
}
