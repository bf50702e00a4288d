use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The PKG action an utterance asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Intent {
    Add,
    Get,
    Delete,
    Unknown,
}

impl Intent {
    pub fn as_str(self) -> &'static str {
        match self {
            Intent::Add => "ADD",
            Intent::Get => "GET",
            Intent::Delete => "DELETE",
            Intent::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for Intent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Intent {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ADD" => Ok(Intent::Add),
            "GET" => Ok(Intent::Get),
            "DELETE" => Ok(Intent::Delete),
            "UNKNOWN" => Ok(Intent::Unknown),
            _ => Err(()),
        }
    }
}
