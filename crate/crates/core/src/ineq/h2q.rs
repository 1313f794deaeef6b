//! Exact brute force of the `H_2q` moment condition on finite joint laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_OUTCOMES: usize = 12;
pub const MAX_VARIABLES: usize = 6;

/// A nondecreasing map applied to one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Transform {
    Identity,
    /// `max(lo, min(x, hi))`.
    Clamp { lo: f64, hi: f64 },
    /// `below` for `x < at`, `above` for `x ≥ at`.
    Step { at: f64, below: f64, above: f64 },
    /// `slope · x + intercept`.
    Affine { slope: f64, intercept: f64 },
}

impl Transform {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Transform::Identity => x,
            Transform::Clamp { lo, hi } => x.clamp(lo, hi),
            Transform::Step { at, below, above } => {
                if x < at {
                    below
                } else {
                    above
                }
            }
            Transform::Affine { slope, intercept } => slope * x + intercept,
        }
    }
}

/// A joint law of `d ≤ 6` variables on `k ≤ 12` outcomes with one transform per variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct H2qInstance {
    /// `outcomes[k][λ]` is the value of variable `λ` in outcome `k`.
    pub outcomes: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
    pub transforms: Vec<Transform>,
}

impl H2qInstance {
    pub fn new(outcomes: Vec<Vec<f64>>, probs: Vec<f64>, transforms: Vec<Transform>) -> Result<Self> {
        let inst = H2qInstance { outcomes, probs, transforms };
        inst.validate()?;
        Ok(inst)
    }

    /// Uniform weights and identity transforms.
    pub fn uniform(outcomes: Vec<Vec<f64>>) -> Result<Self> {
        let k = outcomes.len();
        let d = outcomes.first().map(|o| o.len()).unwrap_or(0);
        Self::new(outcomes, vec![1.0 / k as f64; k], vec![Transform::Identity; d])
    }

    pub fn dim(&self) -> usize {
        self.transforms.len()
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let k = self.outcomes.len();
        let d = self.transforms.len();
        if k == 0 || k > MAX_OUTCOMES {
            v.push(format!("instance needs 1..={MAX_OUTCOMES} outcomes (got {k})"));
        }
        if d == 0 || d > MAX_VARIABLES {
            v.push(format!("instance needs 1..={MAX_VARIABLES} variables (got {d})"));
        }
        if self.probs.len() != k {
            v.push(format!("{} probabilities for {k} outcomes", self.probs.len()));
        }
        if self.outcomes.iter().any(|o| o.len() != d) {
            v.push(format!("every outcome must list {d} values"));
        }
        if self.probs.iter().any(|p| !(*p >= 0.0)) {
            v.push("probabilities must be nonnegative".into());
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            v.push(format!("probabilities sum to {total}, not 1"));
        }
        if v.is_empty() {
            for (lam, f) in self.transforms.iter().enumerate() {
                let mut support: Vec<f64> = self.outcomes.iter().map(|o| o[lam]).collect();
                support.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let image: Vec<f64> = support.iter().map(|&x| f.apply(x)).collect();
                if image.windows(2).any(|w| w[1] < w[0]) || image.iter().any(|y| !y.is_finite()) {
                    v.push(format!("transform {lam} ({f:?}) is not nondecreasing on the support"));
                }
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(v.join("; ")))
        }
    }

    /// Whether every pair of variables is independent, to `tol` in each joint cell.
    pub fn is_pairwise_independent(&self, tol: f64) -> bool {
        let d = self.dim();
        for i in 0..d {
            for j in i + 1..d {
                for (a, _) in self.marginal(i) {
                    for (b, _) in self.marginal(j) {
                        let joint: f64 =
                            self.outcomes.iter().zip(&self.probs).filter(|(o, _)| o[i] == a && o[j] == b).map(|(_, p)| p).sum();
                        let pa: f64 = self.outcomes.iter().zip(&self.probs).filter(|(o, _)| o[i] == a).map(|(_, p)| p).sum();
                        let pb: f64 = self.outcomes.iter().zip(&self.probs).filter(|(o, _)| o[j] == b).map(|(_, p)| p).sum();
                        if (joint - pa * pb).abs() > tol {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn marginal(&self, lam: usize) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (o, p) in self.outcomes.iter().zip(&self.probs) {
            match out.iter_mut().find(|(x, _)| *x == o[lam]) {
                Some(e) => e.1 += p,
                None => out.push((o[lam], *p)),
            }
        }
        out
    }
}

/// Both sides of the condition for the variables in `subset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H2qSides {
    /// `E|Σ (f(X) − E f(X))|^{2q}`.
    pub lhs: f64,
    /// `|I| max E|f(X)|^{2q} + |I|^q max (E f(X)^2)^q`.
    pub bracket: f64,
}

impl H2qSides {
    /// `lhs / bracket`, or 0 when the left side vanishes.
    pub fn constant(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.bracket
        }
    }
}

pub fn h2q_sides(inst: &H2qInstance, q: f64, subset: &[usize]) -> Result<H2qSides> {
    inst.validate()?;
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("q must satisfy q ≥ 1 (got {q})")));
    }
    if subset.is_empty() || subset.iter().any(|&l| l >= inst.dim()) {
        return Err(Error::Domain("subset must be nonempty and index existing variables".into()));
    }
    let f = |o: &Vec<f64>, l: usize| inst.transforms[l].apply(o[l]);
    let mean = |l: usize| inst.outcomes.iter().zip(&inst.probs).map(|(o, p)| p * f(o, l)).sum::<f64>();
    let means: Vec<f64> = subset.iter().map(|&l| mean(l)).collect();
    let lhs: f64 = inst
        .outcomes
        .iter()
        .zip(&inst.probs)
        .map(|(o, p)| {
            let s: f64 = subset.iter().zip(&means).map(|(&l, mu)| f(o, l) - mu).sum();
            p * s.abs().powf(2.0 * q)
        })
        .sum();
    let moment = |l: usize, r: f64| inst.outcomes.iter().zip(&inst.probs).map(|(o, p)| p * f(o, l).abs().powf(r)).sum::<f64>();
    let max2q = subset.iter().map(|&l| moment(l, 2.0 * q)).fold(0.0, f64::max);
    let max2 = subset.iter().map(|&l| moment(l, 2.0)).fold(0.0, f64::max);
    let size = subset.len() as f64;
    Ok(H2qSides { lhs, bracket: size * max2q + size.powf(q) * max2.powf(q) })
}

/// Smallest `C` for which the condition holds with `I` = all variables.
pub fn h2q_min_constant(inst: &H2qInstance, q: f64) -> Result<f64> {
    let all: Vec<usize> = (0..inst.dim()).collect();
    Ok(h2q_sides(inst, q, &all)?.constant())
}

/// Smallest `C` that works for every nonempty subset `I`.
pub fn h2q_min_constant_over_subsets(inst: &H2qInstance, q: f64) -> Result<f64> {
    let d = inst.dim();
    let mut best = 0.0f64;
    for mask in 1u32..(1 << d) {
        let subset: Vec<usize> = (0..d).filter(|l| mask >> l & 1 == 1).collect();
        best = best.max(h2q_sides(inst, q, &subset)?.constant());
    }
    Ok(best)
}

/// The Walsh system of `g` Rademacher generators: `2^g` equally likely
/// outcomes of the `2^g − 1` nonempty-subset products.
pub fn walsh_instance(g: u32) -> Result<H2qInstance> {
    if g == 0 || (1usize << g) - 1 > MAX_VARIABLES || (1usize << g) > MAX_OUTCOMES {
        return Err(Error::Domain(format!("walsh instance with {g} generators does not fit the brute-force limits")));
    }
    let outcomes = (0..1u32 << g)
        .map(|w| {
            (1u32..1 << g)
                .map(|subset| if (w & subset).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
                .collect()
        })
        .collect();
    H2qInstance::uniform(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_triple_gives_one_half() {
        let inst = walsh_instance(2).unwrap();
        assert!(inst.is_pairwise_independent(1e-12));
        let s = h2q_sides(&inst, 1.0, &[0, 1, 2]).unwrap();
        assert_eq!((s.lhs, s.bracket), (3.0, 6.0));
        assert_eq!(h2q_min_constant(&inst, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn independent_pair_at_q2() {
        let inst = H2qInstance::uniform(vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]]).unwrap();
        let s = h2q_sides(&inst, 2.0, &[0, 1]).unwrap();
        assert_eq!((s.lhs, s.bracket), (8.0, 6.0));
        assert!((h2q_min_constant(&inst, 2.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn decreasing_transform_is_rejected() {
        let mut inst = walsh_instance(2).unwrap();
        inst.transforms[1] = Transform::Affine { slope: -1.0, intercept: 0.0 };
        assert!(h2q_min_constant(&inst, 1.0).is_err());
        inst.transforms[1] = Transform::Step { at: 0.0, below: 1.0, above: 0.0 };
        assert!(inst.validate().is_err());
    }

    #[test]
    fn single_variable_is_at_most_one_half() {
        let inst = H2qInstance::new(
            vec![vec![0.0], vec![1.0], vec![5.0]],
            vec![0.2, 0.5, 0.3],
            vec![Transform::Clamp { lo: 0.0, hi: 2.0 }],
        )
        .unwrap();
        assert!(h2q_min_constant(&inst, 1.0).unwrap() <= 0.5);
    }
}
