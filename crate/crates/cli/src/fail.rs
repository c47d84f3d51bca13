use std::fmt;

use modlab_core::Error;

/// A failed invocation, carrying the process exit status.
#[derive(Debug)]
pub enum Fail {
    /// Malformed instance, unknown key or bad flag value.
    Schema(String),
    Numeric(String),
    Invariant(String),
    Io(String),
}

impl Fail {
    pub fn code(&self) -> i32 {
        match self {
            Fail::Schema(_) => 2,
            Fail::Numeric(_) => 3,
            Fail::Invariant(_) => 4,
            Fail::Io(_) => 1,
        }
    }
}

impl fmt::Display for Fail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            Fail::Schema(m) => ("schema error", m),
            Fail::Numeric(m) => ("numeric failure", m),
            Fail::Invariant(m) => ("invariant violation", m),
            Fail::Io(m) => ("i/o error", m),
        };
        // diagnostics stay on one line
        write!(f, "{kind}: {}", msg.replace('\n', " "))
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::NumericFailure(_) => Fail::Numeric(e.to_string()),
            Error::NotMonotone { .. } | Error::ConstructionInvariant(_) => Fail::Invariant(e.to_string()),
            _ => Fail::Schema(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail::Schema(e.to_string())
    }
}

pub type Outcome<T> = std::result::Result<T, Fail>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Fail::from(Error::NumericFailure("stall".into())).code(), 3);
        assert_eq!(Fail::from(Error::ConstructionInvariant("g".into())).code(), 4);
        assert_eq!(Fail::Io("x".into()).code(), 1);
        let bad: serde_json::Error = serde_json::from_str::<u8>("[").unwrap_err();
        assert_eq!(Fail::from(bad).code(), 2);
        assert!(!Fail::Schema("a\nb".into()).to_string().contains('\n'));
    }
}
