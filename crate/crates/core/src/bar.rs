use std::fmt;
use std::str::FromStr;

/// Which zigzag module a bar belongs to: homology or boundary groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Module {
    H,
    B,
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Module::H => "H",
            Module::B => "B",
        })
    }
}

impl FromStr for Module {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "H" => Ok(Module::H),
            "B" => Ok(Module::B),
            other => Err(format!("unknown module {other:?}")),
        }
    }
}

/// An interval `[birth, death]` of one module in one degree.
///
/// Ordering is the barcode output order: H before B, then degree, birth, death.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bar {
    pub module: Module,
    pub degree: usize,
    pub birth: usize,
    pub death: usize,
}

impl Bar {
    pub fn new(module: Module, degree: usize, birth: usize, death: usize) -> Self {
        Bar {
            module,
            degree,
            birth,
            death,
        }
    }

    pub fn contains(&self, index: usize) -> bool {
        self.birth <= index && index <= self.death
    }
}

impl fmt::Display for Bar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.module, self.degree, self.birth, self.death)
    }
}
