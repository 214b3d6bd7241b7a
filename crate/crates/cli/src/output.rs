use std::fmt;
use std::path::{Path, PathBuf};

/// Command failure carrying its exit code class.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or inconsistent configuration (exit 2).
    Usage(String),
    /// Non-convergence, failed verification, or a rejected spline (exit 3).
    Failed(String),
    /// Unreadable or unwritable file (exit 4).
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
            CliError::Io { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl From<priorint::Error> for CliError {
    fn from(e: priorint::Error) -> Self {
        use priorint::Error::*;
        match e {
            Domain(_) | Config(_) => CliError::Usage(e.to_string()),
            InvalidShape { .. } | Construction(_) | Convergence(_) | OutOfGrid { .. }
            | Subproblem(_) | Json(_) => CliError::Failed(e.to_string()),
        }
    }
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })
}

/// `x` to six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=9).contains(&exp) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn interval6(lower: f64, upper: f64) -> String {
    format!("[{}, {}]", sig6(lower), sig6(upper))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.979_982_3), "0.979982");
        assert_eq!(sig6(-1.644_853_6), "-1.64485");
        assert_eq!(sig6(123.456_789), "123.457");
        assert_eq!(sig6(0.000_123_456_7), "0.000123457");
        assert_eq!(sig6(1.5e-9), "1.50000e-9");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(priorint::Error::Config("x".into())).exit_code(), 2);
        let shape = priorint::Error::InvalidShape { y: 0.0, reason: "x".into() };
        assert_eq!(CliError::from(shape).exit_code(), 3);
        assert_eq!(CliError::Io { path: "a".into(), message: "b".into() }.exit_code(), 4);
    }
}
