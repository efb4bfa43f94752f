use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// The three uses of "it" distinguished by the annotation scheme.
///
/// The declaration order is the canonical class order used for ties,
/// weight rows, reports and confusion matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// Refers back to a noun phrase.
    Nom,
    /// Non-referential.
    Pleon,
    /// Refers back to a clause or proposition.
    Clause,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Nom, Label::Pleon, Label::Clause];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Nom => "NOM",
            Label::Pleon => "PLEON",
            Label::Clause => "CLAUSE",
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
        match s.trim() {
            "NOM" => Ok(Label::Nom),
            "PLEON" => Ok(Label::Pleon),
            "CLAUSE" => Ok(Label::Clause),
            other => Err(Error::invalid(format!(
                "label `{other}` is not one of PLEON, NOM, CLAUSE"
            ))),
        }
    }
}
