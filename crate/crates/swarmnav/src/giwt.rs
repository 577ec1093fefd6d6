//! Turn-direction network (placeholder while the module is built out).

/// A left/right circumvention decision. Wire encoding: left = 0, right = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TurnDir {
    Left,
    Right,
}

impl TurnDir {
    pub fn label(self) -> u8 {
        match self {
            TurnDir::Left => 0,
            TurnDir::Right => 1,
        }
    }

    pub fn from_label(label: u8) -> Option<Self> {
        match label {
            0 => Some(TurnDir::Left),
            1 => Some(TurnDir::Right),
            _ => None,
        }
    }

    pub fn mirrored(self) -> Self {
        match self {
            TurnDir::Left => TurnDir::Right,
            TurnDir::Right => TurnDir::Left,
        }
    }
}

impl std::fmt::Display for TurnDir {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TurnDir::Left => write!(f, "left"),
            TurnDir::Right => write!(f, "right"),
        }
    }
}
