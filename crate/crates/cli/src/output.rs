use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::{CheckLine, CliError, RunReport};

/// 17 significant digits in scientific notation; enough to round-trip an `f64`.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub(crate) fn opt_number(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

pub(crate) struct CsvOut {
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub(crate) fn create(path: &Path, header: &[&str]) -> Result<Self, CliError> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(BufWriter::new(File::create(path)?));
        writer.write_record(header)?;
        Ok(CsvOut { writer })
    }

    pub(crate) fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub(crate) fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush()?;
        Ok(())
    }
}

pub(crate) fn write_checks_csv(path: &Path, checks: &[CheckLine]) -> Result<(), CliError> {
    let mut out = CsvOut::create(path, &["check_name", "max_violation", "tolerance", "pass"])?;
    for c in checks {
        out.row(&[c.name.clone(), format_number(c.max_violation), format_number(c.tolerance), c.pass.to_string()])?;
    }
    out.finish()
}

pub(crate) fn write_report(path: &Path, report: &RunReport) -> Result<(), CliError> {
    let mut file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut file, report).map_err(|e| CliError::Io(e.into()))?;
    file.write_all(b"\n")?;
    file.flush()?;
    Ok(())
}
