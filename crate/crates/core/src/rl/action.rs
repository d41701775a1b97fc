use std::fmt;

use serde::{Deserialize, Serialize};

/// High-level decision with stable integer codes used in files and maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Following = 0,
    Overtaking = 1,
    Aborting = 2,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Following, Action::Overtaking, Action::Aborting];
    pub const COUNT: usize = 3;

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Action> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Following => "following",
            Action::Overtaking => "overtaking",
            Action::Aborting => "aborting",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_fixed() {
        assert_eq!(Action::Following.code(), 0);
        assert_eq!(Action::Overtaking.code(), 1);
        assert_eq!(Action::Aborting.code(), 2);
        for a in Action::ALL {
            assert_eq!(Action::from_code(a.code()), Some(a));
        }
        assert_eq!(Action::from_code(3), None);
    }
}
