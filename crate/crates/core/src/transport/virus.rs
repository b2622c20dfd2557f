use nalgebra::DMatrix;
use num_integer::Integer;
use num_rational::Ratio;

use super::asymptotics::{component_period, structure};
use super::{EdgeField, EvolveOptions, Scheme, Speed, Stepper, TransportSystem};
use crate::{Error, Result};

/// Variant-prevalence model. State `i = q·P + p` (0-based) holds people in
/// patch `p` carrying variant `q`; the last variant stands for uncolonised
/// people. Each state is a unit interval traversed in time `t_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct VirusModel {
    pub patches: usize,
    pub variants: usize,
    system: TransportSystem,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VirusReport {
    /// `prev[p][q]` for the true variants `q < Q − 1`; NaN when no colonised
    /// mass survives in patch `p`.
    pub prev: Vec<Vec<f64>>,
    /// Variant with the largest prevalence per patch.
    pub dominant: Vec<Option<usize>>,
    /// Period-averaged mass per state, zero outside terminal components.
    pub averages: Vec<f64>,
}

impl VirusModel {
    /// `weights[(j, i)]` is the fraction leaving state `i` into state `j`.
    /// Transfers that change both patch and variant are forbidden.
    pub fn new(patches: usize, variants: usize, durations: &[Ratio<i64>], weights: DMatrix<f64>) -> Result<Self> {
        if patches == 0 || variants < 2 {
            return Err(Error::InvalidParams(format!("{patches} patches and {variants} variants")));
        }
        if durations.len() != variants {
            return Err(Error::DimMismatch(format!("{} durations for {variants} variants", durations.len())));
        }
        let size = patches * variants;
        if weights.shape() != (size, size) {
            return Err(Error::DimMismatch(format!("weights {:?}, expected {size}×{size}", weights.shape())));
        }
        for i in 0..size {
            for j in 0..size {
                let (qi, pi) = (i / patches, i % patches);
                let (qj, pj) = (j / patches, j % patches);
                if qi != qj && pi != pj && weights[(j, i)] != 0.0 {
                    return Err(Error::InvalidWeights(format!(
                        "state {} (patch {}, variant {}) cannot move to patch {} and variant {} at once",
                        i + 1,
                        pi + 1,
                        qi + 1,
                        pj + 1,
                        qj + 1
                    )));
                }
            }
        }
        let speeds = (0..size)
            .map(|i| {
                let t = durations[i / patches];
                if *t.numer() <= 0 {
                    return Err(Error::InvalidParams(format!("duration {t} is not positive")));
                }
                Speed::rational(t.recip())
            })
            .collect::<Result<Vec<_>>>()?;
        let system = TransportSystem::from_transfer(speeds, weights)?;
        Ok(Self { patches, variants, system })
    }

    pub fn system(&self) -> &TransportSystem {
        &self.system
    }

    /// Averaged prevalence from the initial distribution `f`.
    pub fn prevalence(&self, f: &EdgeField) -> Result<VirusReport> {
        let ts = &self.system;
        let st = structure(ts);
        let mut lcm_num = 1i64;
        let mut gcd_den = 0i64;
        for edges in &st.terminal {
            let tau = component_period(ts, edges)?.expect("rational durations");
            lcm_num = lcm_num.lcm(tau.numer());
            gcd_den = gcd_den.gcd(tau.denom());
        }
        // common multiple of all component periods
        let block = Ratio::new(lcm_num, gcd_den.max(1));
        let opts = EvolveOptions { scheme: Scheme::Exact, ..Default::default() };
        let mut stepper = Stepper::new(ts, f, &opts)?;
        let dt = stepper.dt();
        let block_steps = ((*block.numer() as f64 / *block.denom() as f64) / dt).round() as u64;
        let warmup = (ts.traversal_time() / dt).ceil() as u64;
        for _ in 0..warmup {
            stepper.step();
        }
        let m = ts.edge_count();
        let scale = f.mass().abs().max(f64::MIN_POSITIVE);
        let mut previous: Option<Vec<f64>> = None;
        let max_blocks = (10_000_000 / (block_steps.max(1) * m as u64).max(1)).clamp(20, 100_000);
        for _ in 0..max_blocks {
            let mut sums = vec![0.0; m];
            let mut before = stepper.edge_masses();
            for _ in 0..block_steps {
                stepper.step();
                let after = stepper.edge_masses();
                for j in 0..m {
                    sums[j] += 0.5 * (before[j] + after[j]);
                }
                before = after;
            }
            let means: Vec<f64> = sums.iter().map(|s| s / block_steps as f64).collect();
            if let Some(prev) = &previous {
                let gap = prev.iter().zip(&means).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if gap <= 1e-12 * scale {
                    return Ok(self.report(&means, &st.in_terminal));
                }
            }
            previous = Some(means);
        }
        Err(Error::ToleranceNotMet("period averages did not settle".into()))
    }

    fn report(&self, means: &[f64], in_terminal: &[bool]) -> VirusReport {
        let (p_count, q_count) = (self.patches, self.variants);
        let averages: Vec<f64> = means.iter().zip(in_terminal).map(|(&x, &t)| if t { x } else { 0.0 }).collect();
        let mut prev = Vec::with_capacity(p_count);
        let mut dominant = Vec::with_capacity(p_count);
        for p in 0..p_count {
            let colonised: f64 = (0..q_count - 1).map(|q| averages[q * p_count + p]).sum();
            let row: Vec<f64> = (0..q_count - 1)
                .map(|q| if colonised > 0.0 { averages[q * p_count + p] / colonised } else { f64::NAN })
                .collect();
            let best = (colonised > 0.0)
                .then(|| (0..row.len()).fold(0, |b, q| if row[q] > row[b] { q } else { b }));
            prev.push(row);
            dominant.push(best);
        }
        VirusReport { prev, dominant, averages }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Ratio<i64> {
        Ratio::from_integer(n)
    }

    #[test]
    fn single_true_variant_has_prevalence_one() {
        // P = 1, Q = 2 with the four weights of the two-state graph
        let w = DMatrix::from_row_slice(2, 2, &[0.3, 0.6, 0.7, 0.4]);
        let model = VirusModel::new(1, 2, &[r(1), Ratio::new(3, 2)], w).unwrap();
        let rep = model.prevalence(&EdgeField::constant(2, 4, 1.0)).unwrap();
        assert_eq!(rep.prev, vec![vec![1.0]]);
        assert_eq!(rep.dominant, vec![Some(0)]);
    }

    #[test]
    fn prevalence_follows_stationary_distribution() {
        let m = DMatrix::from_row_slice(3, 3, &[0.5, 0.2, 0.1, 0.3, 0.6, 0.3, 0.2, 0.2, 0.6]);
        let model = VirusModel::new(1, 3, &[r(1), r(1), r(1)], m.clone()).unwrap();
        let rep = model.prevalence(&EdgeField::constant(3, 4, 1.0)).unwrap();
        // stationary distribution by power iteration on the Markov chain
        let mut pi = nalgebra::DVector::from_element(3, 1.0 / 3.0);
        for _ in 0..2000 {
            pi = &m * pi;
        }
        let expected = [pi[0] / (pi[0] + pi[1]), pi[1] / (pi[0] + pi[1])];
        for q in 0..2 {
            assert!((rep.prev[0][q] - expected[q]).abs() < 1e-10, "{:?} vs {expected:?}", rep.prev);
        }
        assert_eq!(rep.dominant, vec![Some(1)]);
    }

    #[test]
    fn symmetric_patches_agree() {
        // P = 2, Q = 2: travel within a variant, mutation within a patch
        let (p, q) = (2, 2);
        let mut w = DMatrix::zeros(4, 4);
        let idx = |q: usize, pp: usize| q * p + pp;
        for qq in 0..q {
            for pp in 0..p {
                let i = idx(qq, pp);
                w[(i, i)] = 0.5;
                w[(idx(qq, 1 - pp), i)] = 0.2;
                w[(idx(1 - qq, pp), i)] = 0.3;
            }
        }
        let model = VirusModel::new(p, q, &[r(2), r(1)], w).unwrap();
        let rep = model.prevalence(&EdgeField::constant(4, 4, 1.0)).unwrap();
        assert_eq!(rep.prev[0], rep.prev[1]);
    }

    #[test]
    fn cross_moves_are_rejected() {
        let mut w = DMatrix::identity(4, 4);
        w[(0, 0)] = 0.5;
        w[(3, 0)] = 0.5; // patch 1 variant 1 -> patch 2 variant 2
        assert!(matches!(VirusModel::new(2, 2, &[r(1), r(1)], w), Err(Error::InvalidWeights(_))));
    }
}
