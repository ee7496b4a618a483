use std::io::Write;
use std::path::Path;

use ring_ladder::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_COVERAGE: i32 = 4;
pub const EXIT_VALIDATION: i32 = 5;

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub kind: &'static str,
    pub code: i32,
    pub message: String,
    pub missing: Vec<String>,
}

impl Failure {
    pub fn new(kind: &'static str, code: i32, message: impl Into<String>) -> Self {
        Self {
            kind,
            code,
            message: message.into(),
            missing: Vec::new(),
        }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self) -> String {
        let mut v = serde_json::json!({
            "error": self.kind,
            "exit_code": self.code,
            "message": self.message,
        });
        if !self.missing.is_empty() {
            v["missing"] = serde_json::json!(self.missing);
        }
        v.to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (kind, code) = match &e {
            Error::Domain(_) | Error::LadderTooShort(_) | Error::OddLadder(_) | Error::Capacity(_) => {
                ("usage", EXIT_USAGE)
            }
            Error::Convergence { .. } => ("convergence", EXIT_CONVERGENCE),
            Error::Coverage { .. } | Error::Lookup(_) => ("coverage", EXIT_COVERAGE),
            Error::Validation(_) | Error::XFormViolation { .. } | Error::Precondition(_) => {
                ("validation", EXIT_VALIDATION)
            }
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::CorruptCache { .. } => ("io", EXIT_IO),
        };
        let missing = match e {
            Error::Coverage { missing } => missing,
            _ => Vec::new(),
        };
        Self {
            kind,
            code,
            message,
            missing,
        }
    }
}

/// Writes `bytes` to `path` through a sibling temp file and a rename, or to
/// stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> ring_ladder::Result<()> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes)?;
        return Ok(out.flush()?);
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let res = std::fs::File::create(&tmp).and_then(|mut f| {
        f.write_all(bytes)?;
        f.sync_all()
    });
    if let Err(e) = res.and_then(|_| std::fs::rename(&tmp, path)) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

pub fn json_line<T: serde::Serialize>(value: &T) -> ring_ladder::Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(value)?;
    s.push(b'\n');
    Ok(s)
}
