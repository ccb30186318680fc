use std::fmt;

use serde::{Deserialize, Serialize};

use super::cost::{total_cost, CostBreakdown};
use super::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Split {
    S1,
    S2,
    S3,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::S1, Split::S2, Split::S3];
}

/// Placement of one DU: fully distributed, or a split hosted at CU `cu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Choice {
    DRan,
    Split { split: Split, cu: usize },
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Choice::DRan => write!(f, "D-RAN"),
            Choice::Split { split, cu } => write!(f, "{split:?}@cu{cu}"),
        }
    }
}

/// The binary decisions. Per-pair vectors are indexed `[n][m]`. Values are
/// stored as integers so that corrupted inputs can be reported, not rejected.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Binaries {
    pub x1: Vec<u8>,
    pub x2: Vec<u8>,
    pub y1: Vec<Vec<u8>>,
    pub y2: Vec<Vec<u8>>,
    pub z: Vec<Vec<u8>>,
    pub v1: Vec<Vec<u8>>,
    pub v2: Vec<Vec<u8>>,
}

impl Binaries {
    pub fn zeros(n: usize, m: usize) -> Self {
        let grid = vec![vec![0u8; m]; n];
        Binaries {
            x1: vec![0; n],
            x2: vec![0; n],
            y1: grid.clone(),
            y2: grid.clone(),
            z: grid.clone(),
            v1: grid.clone(),
            v2: grid,
        }
    }

    pub fn num_dus(&self) -> usize {
        self.x1.len()
    }

    pub fn num_cus(&self) -> usize {
        self.z.first().map_or(0, Vec::len)
    }

    /// Binaries for one choice per DU, with `v` set to the products `x z`.
    pub fn from_choices(choices: &[Choice], m: usize) -> Self {
        let mut b = Binaries::zeros(choices.len(), m);
        for (n, choice) in choices.iter().enumerate() {
            b.set_choice(n, *choice);
        }
        b
    }

    pub fn set_choice(&mut self, n: usize, choice: Choice) {
        let m = self.num_cus();
        for k in 0..m {
            self.y1[n][k] = 0;
            self.y2[n][k] = 0;
            self.z[n][k] = 0;
        }
        let (x1, x2) = match choice {
            Choice::DRan => (1, 1),
            Choice::Split { split, cu } => {
                self.z[n][cu] = 1;
                match split {
                    Split::S1 => (1, 1),
                    Split::S2 => {
                        self.y2[n][cu] = 1;
                        (1, 0)
                    }
                    Split::S3 => {
                        self.y1[n][cu] = 1;
                        self.y2[n][cu] = 1;
                        (0, 0)
                    }
                }
            }
        };
        self.x1[n] = x1;
        self.x2[n] = x2;
        for k in 0..m {
            self.v1[n][k] = x1 * self.z[n][k];
            self.v2[n][k] = x2 * self.z[n][k];
        }
    }

    /// Decode DU `n`'s placement; `None` if the binaries match no valid choice.
    pub fn choice(&self, n: usize) -> Option<Choice> {
        let m = self.num_cus();
        let cus: Vec<usize> = (0..m).filter(|&k| self.z[n][k] == 1).collect();
        let candidate = match cus.as_slice() {
            [] => Choice::DRan,
            [cu] => {
                let split = match (self.x1[n], self.x2[n]) {
                    (1, 1) => Split::S1,
                    (1, 0) => Split::S2,
                    (0, 0) => Split::S3,
                    _ => return None,
                };
                Choice::Split { split, cu: *cu }
            }
            _ => return None,
        };
        let mut expect = self.clone();
        expect.set_choice(n, candidate);
        let same = expect.x1[n] == self.x1[n]
            && expect.x2[n] == self.x2[n]
            && expect.y1[n] == self.y1[n]
            && expect.y2[n] == self.y2[n]
            && expect.z[n] == self.z[n]
            && expect.v1[n] == self.v1[n]
            && expect.v2[n] == self.v2[n];
        same.then_some(candidate)
    }

    pub fn choices(&self) -> Option<Vec<Choice>> {
        (0..self.num_dus()).map(|n| self.choice(n)).collect()
    }

    /// Functions hosted at CUs over all functions (3 per DU).
    pub fn centralization(&self) -> f64 {
        let n = self.num_dus();
        if n == 0 {
            return 0.0;
        }
        let mut hosted = 0u32;
        for i in 0..n {
            for k in 0..self.num_cus() {
                hosted +=
                    u32::from(self.y1[i][k]) + u32::from(self.y2[i][k]) + u32::from(self.z[i][k]);
            }
        }
        f64::from(hosted) / (3 * n) as f64
    }

    /// CU sites serving at least one DU.
    pub fn deployed_cus(&self) -> usize {
        (0..self.num_cus())
            .filter(|&k| self.z.iter().any(|row| row[k] == 1))
            .count()
    }
}

/// A complete plan: binaries, flow per path id and its evaluated cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub objective: f64,
    pub breakdown: CostBreakdown,
    pub assignment: Vec<String>,
    #[serde(flatten)]
    pub binaries: Binaries,
    /// Mb/s on each path, indexed by path id
    pub flows: Vec<f64>,
}

impl Solution {
    /// Evaluate `binaries` and `flows` on `inst`.
    pub fn evaluate(binaries: Binaries, flows: Vec<f64>, inst: &Instance) -> Self {
        let breakdown = total_cost(&binaries, &flows, inst);
        let assignment = (0..binaries.num_dus())
            .map(|n| binaries.choice(n).map_or_else(|| "invalid".to_string(), |c| c.to_string()))
            .collect();
        Solution {
            objective: breakdown.total,
            breakdown,
            assignment,
            binaries,
            flows,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s2_mapping() {
        let b = Binaries::from_choices(
            &[Choice::Split {
                split: Split::S2,
                cu: 0,
            }],
            1,
        );
        assert_eq!((b.x1[0], b.x2[0]), (1, 0));
        assert_eq!((b.y1[0][0], b.y2[0][0], b.z[0][0]), (0, 1, 1));
        assert_eq!((b.v1[0][0], b.v2[0][0]), (1, 0));
    }

    #[test]
    fn every_choice_decodes_to_itself() {
        let mut all = vec![Choice::DRan];
        for cu in 0..3 {
            for split in Split::ALL {
                all.push(Choice::Split { split, cu });
            }
        }
        for c in all {
            let b = Binaries::from_choices(&[c], 3);
            assert_eq!(b.choice(0), Some(c));
        }
    }

    #[test]
    fn centralization_extremes() {
        let cran = Binaries::from_choices(
            &[Choice::Split {
                split: Split::S3,
                cu: 0,
            }; 2],
            1,
        );
        assert_eq!(cran.centralization(), 1.0);
        assert_eq!(
            Binaries::from_choices(&[Choice::DRan; 2], 1).centralization(),
            0.0
        );
    }
}
