//! Strategy selection: action restrictions, tabular Q-learning and the MLP
//! classifier distilled from the Q-table.

use std::fmt;
use std::str::FromStr;

use crate::cone::FeatureVector;

mod mlp;
mod qlearn;

pub use mlp::{mlp_train, Dataset, MlpError, MlpModel, MlpParams, MODEL_VERSION};
pub use qlearn::{
    choose_action, generate_dataset, q_target, run_episode, train_q, update_q, EpisodeParams, EpisodeResult, QError,
    QTable, Transition,
};

/// Rewriting engine applied to one cone. The integer codes are fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Isop = 0,
    Exact = 1,
    Npn = 2,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Isop, Action::Exact, Action::Npn];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(c: usize) -> Option<Action> {
        Action::ALL.get(c).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Isop => "isop",
            Action::Exact => "exact",
            Action::Npn => "npn",
        }
    }

    /// Leaf counts the engine accepts.
    pub fn input_range(self) -> std::ops::RangeInclusive<usize> {
        match self {
            Action::Isop => 2..=10,
            Action::Exact => 2..=5,
            Action::Npn => 2..=4,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "isop" | "0" => Ok(Action::Isop),
            "exact" | "1" => Ok(Action::Exact),
            "npn" | "2" => Ok(Action::Npn),
            _ => Err(format!("unknown action {s:?}")),
        }
    }
}

/// Actions whose input range contains `input_size`, in code order.
pub fn actions_for_size(input_size: usize) -> &'static [Action] {
    match input_size {
        2..=4 => &Action::ALL,
        5 => &[Action::Isop, Action::Exact],
        6..=10 => &[Action::Isop],
        _ => &[],
    }
}

pub fn possible_actions(fv: &FeatureVector) -> &'static [Action] {
    let a = actions_for_size(fv.input_size as usize);
    debug_assert!(!a.is_empty(), "input_size {} outside [2,10]", fv.input_size);
    a
}

/// Picks the engine for a cone at inference time.
#[derive(Clone, Debug)]
pub enum Selector {
    /// Exact synthesis up to five leaves, ISOP above.
    Rule,
    Model(MlpModel<f64>),
}

pub fn select_strategy(sel: &Selector, fv: &FeatureVector) -> Action {
    let allowed = possible_actions(fv);
    match sel {
        Selector::Rule => {
            if fv.input_size <= 5 {
                Action::Exact
            } else {
                Action::Isop
            }
        }
        Selector::Model(m) => {
            let p = m.predict(fv);
            let mut best = allowed[0];
            for &a in allowed {
                if p[a.code()] > p[best.code()] {
                    best = a;
                }
            }
            best
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(input_size: u32) -> FeatureVector {
        FeatureVector { input_size, ..Default::default() }
    }

    #[test]
    fn restriction_ranges() {
        assert_eq!(possible_actions(&fv(3)), &[Action::Isop, Action::Exact, Action::Npn]);
        assert_eq!(possible_actions(&fv(5)), &[Action::Isop, Action::Exact]);
        assert_eq!(possible_actions(&fv(8)), &[Action::Isop]);
        for a in Action::ALL {
            for k in 2..=10 {
                assert_eq!(a.input_range().contains(&k), actions_for_size(k).contains(&a));
            }
        }
    }

    #[test]
    fn codes_are_fixed() {
        assert_eq!(Action::Isop as u8, 0);
        assert_eq!(Action::Exact as u8, 1);
        assert_eq!(Action::Npn as u8, 2);
        assert_eq!(Action::from_code(1), Some(Action::Exact));
        assert_eq!("npn".parse::<Action>().unwrap(), Action::Npn);
    }

    #[test]
    fn rule_selector() {
        assert_eq!(select_strategy(&Selector::Rule, &fv(5)), Action::Exact);
        assert_eq!(select_strategy(&Selector::Rule, &fv(6)), Action::Isop);
    }
}
