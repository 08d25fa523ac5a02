use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Ground-truth class of a face image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// Bona fide presentation.
    Genuine,
    /// Morphing attack.
    Morphed,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Genuine, Label::Morphed];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Genuine => "genuine",
            Label::Morphed => "morphed",
        }
    }

    /// Scores-file spelling: `bonafide` / `attack`.
    pub fn presentation(self) -> &'static str {
        match self {
            Label::Genuine => "bonafide",
            Label::Morphed => "attack",
        }
    }

    /// `+1` for genuine, `-1` for morphed.
    pub fn sign(self) -> f64 {
        match self {
            Label::Genuine => 1.0,
            Label::Morphed => -1.0,
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Genuine => Label::Morphed,
            Label::Morphed => Label::Genuine,
        }
    }

    pub(crate) fn code(self) -> u64 {
        match self {
            Label::Genuine => 0,
            Label::Morphed => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "genuine" | "bonafide" | "bona_fide" | "+1" | "1" => Ok(Label::Genuine),
            "morphed" | "attack" | "morph" | "-1" => Ok(Label::Morphed),
            other => Err(Error::Parse(format!("unknown label '{other}'"))),
        }
    }
}
