use num_complex::Complex64;

use super::observables::{loop_kernel, Observables};
use crate::potential::PotentialSpec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Accumulators of one replica (or of a merge of several).
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaStats {
    pub proposed: u64,
    pub accepted: u64,
    /// Proposal scale at the end of burn-in.
    pub proposal_scale: f64,
    pub samples: u64,
    /// Cell hit counts, row-major on the density grid (empty without one).
    pub histogram: Vec<u64>,
    /// Running means of the trace observables.
    pub trace_mean: Vec<Complex64>,
    /// Co-moments `sum (X_a - mean_a)(X_b - mean_b)`, row-major `K x K`.
    pub trace_comoment: Vec<Complex64>,
    /// Per-measurement trace values when series are kept.
    pub series: Vec<Vec<Complex64>>,
    pub loop_sum: Vec<Complex64>,
    pub loop_close: Vec<u64>,
    /// `sum L(z) n_c` per Ward cell.
    pub ward_l_count: Vec<Complex64>,
    /// `sum_{i in c} 1 / (z - z_i)` per Ward cell.
    pub ward_inverse: Vec<Complex64>,
}

impl ReplicaStats {
    pub(crate) fn empty(obs: &Observables) -> Self {
        let k = obs.traces.len();
        let cells = obs.ward.as_ref().map_or(0, |w| w.grid.len());
        Self {
            proposed: 0,
            accepted: 0,
            proposal_scale: f64::NAN,
            samples: 0,
            histogram: vec![0; obs.density.as_ref().map_or(0, |g| g.len())],
            trace_mean: vec![ZERO; k],
            trace_comoment: vec![ZERO; k * k],
            series: Vec::new(),
            loop_sum: vec![ZERO; obs.loop_probes.len()],
            loop_close: vec![0; obs.loop_probes.len()],
            ward_l_count: vec![ZERO; cells],
            ward_inverse: vec![ZERO; cells],
        }
    }

    pub fn acceptance(&self) -> f64 {
        self.accepted as f64 / self.proposed.max(1) as f64
    }

    pub(crate) fn record(&mut self, spec: &PotentialSpec, obs: &Observables, points: &[Complex64]) {
        self.samples += 1;
        if let Some(grid) = &obs.density {
            for z in points {
                if let Some((i, j)) = grid.cell_of(*z) {
                    self.histogram[grid.index(i, j)] += 1;
                }
            }
        }
        if !obs.traces.is_empty() {
            let x: Vec<Complex64> = obs
                .traces
                .iter()
                .map(|(_, f)| points.iter().map(|z| f(*z)).sum())
                .collect();
            let k = x.len();
            let n = self.samples as f64;
            let before: Vec<Complex64> = x.iter().zip(&self.trace_mean).map(|(v, m)| v - m).collect();
            for (m, d) in self.trace_mean.iter_mut().zip(&before) {
                *m += d / n;
            }
            for a in 0..k {
                for b in 0..k {
                    self.trace_comoment[a * k + b] += before[a] * (x[b] - self.trace_mean[b]);
                }
            }
            if obs.keep_series {
                self.series.push(x);
            }
        }
        for (p, probe) in obs.loop_probes.iter().enumerate() {
            self.loop_sum[p] += loop_kernel(spec, points, *probe);
            if points.iter().any(|z| (probe - z).norm() < obs.loop_epsilon) {
                self.loop_close[p] += 1;
            }
        }
        if let Some(ward) = &obs.ward {
            let l = loop_kernel(spec, points, ward.probe);
            let mut counts = vec![0u32; ward.grid.len()];
            for z in points {
                if let Some((i, j)) = ward.grid.cell_of(*z) {
                    let c = ward.grid.index(i, j);
                    counts[c] += 1;
                    self.ward_inverse[c] += (ward.probe - z).inv();
                }
            }
            for (c, n) in counts.iter().enumerate().filter(|(_, n)| **n > 0) {
                self.ward_l_count[c] += l * *n as f64;
            }
        }
    }

    /// Adds `other` into `self` (sums, and the pairwise update for the
    /// trace means and co-moments).
    pub fn merge(&mut self, other: &ReplicaStats) {
        let (n1, n2) = (self.samples as f64, other.samples as f64);
        let n = n1 + n2;
        if n2 > 0.0 {
            let k = self.trace_mean.len();
            let delta: Vec<Complex64> = other
                .trace_mean
                .iter()
                .zip(&self.trace_mean)
                .map(|(b, a)| b - a)
                .collect();
            for a in 0..k {
                for b in 0..k {
                    self.trace_comoment[a * k + b] +=
                        other.trace_comoment[a * k + b] + delta[a] * delta[b] * (n1 * n2 / n);
                }
            }
            for (m, d) in self.trace_mean.iter_mut().zip(&delta) {
                *m += d * (n2 / n);
            }
        }
        self.proposed += other.proposed;
        self.accepted += other.accepted;
        self.samples += other.samples;
        add(&mut self.histogram, &other.histogram);
        self.series.extend(other.series.iter().cloned());
        add_c(&mut self.loop_sum, &other.loop_sum);
        add(&mut self.loop_close, &other.loop_close);
        add_c(&mut self.ward_l_count, &other.ward_l_count);
        add_c(&mut self.ward_inverse, &other.ward_inverse);
    }
}

fn add(into: &mut [u64], from: &[u64]) {
    for (a, b) in into.iter_mut().zip(from) {
        *a += b;
    }
}

fn add_c(into: &mut [Complex64], from: &[Complex64]) {
    for (a, b) in into.iter_mut().zip(from) {
        *a += b;
    }
}

/// Per-replica accumulators of a run together with what was recorded.
#[derive(Debug, Clone)]
pub struct ChainStats {
    pub replicas: Vec<ReplicaStats>,
    pub observables: Observables,
    pub spec: PotentialSpec,
    pub n: usize,
}

impl PartialEq for ChainStats {
    fn eq(&self, other: &Self) -> bool {
        self.replicas == other.replicas && self.spec == other.spec && self.n == other.n
    }
}

impl ChainStats {
    pub fn from_replicas(
        spec: PotentialSpec,
        observables: Observables,
        n: usize,
        replicas: Vec<ReplicaStats>,
    ) -> Self {
        Self {
            replicas,
            observables,
            spec,
            n,
        }
    }

    /// All replicas merged in index order.
    pub fn merged(&self) -> ReplicaStats {
        self.merged_without(None)
    }

    /// Merge leaving out replica `skip`.
    pub fn merged_without(&self, skip: Option<usize>) -> ReplicaStats {
        let mut acc = ReplicaStats::empty(&self.observables);
        for (k, r) in self.replicas.iter().enumerate() {
            if Some(k) != skip {
                acc.merge(r);
            }
        }
        acc
    }

    pub fn samples(&self) -> u64 {
        self.replicas.iter().map(|r| r.samples).sum()
    }

    pub fn acceptance(&self) -> f64 {
        let p: u64 = self.replicas.iter().map(|r| r.proposed).sum();
        let a: u64 = self.replicas.iter().map(|r| r.accepted).sum();
        a as f64 / p.max(1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs() -> Observables {
        Observables::default()
            .with_trace("x", |z| Complex64::new(z.re, 0.0))
            .with_trace("z2", |z| z * z)
    }

    fn spec() -> PotentialSpec {
        PotentialSpec::with_particles(1.0, 1.0, 2, vec![Complex64::new(0.0, 0.0)]).unwrap()
    }

    fn configs() -> Vec<Vec<Complex64>> {
        (0..9)
            .map(|k| {
                let a = k as f64 * 0.37;
                vec![Complex64::new(a.cos(), 0.3 * a), Complex64::new(-0.2 * a, a.sin())]
            })
            .collect()
    }

    #[test]
    fn merged_comoments_match_direct_covariance() {
        let (s, o) = (spec(), obs());
        let mut parts = vec![ReplicaStats::empty(&o), ReplicaStats::empty(&o), ReplicaStats::empty(&o)];
        for (k, c) in configs().iter().enumerate() {
            parts[k % 3].record(&s, &o, c);
        }
        let mut all = ReplicaStats::empty(&o);
        for p in &parts {
            all.merge(p);
        }
        let xs: Vec<[Complex64; 2]> = configs()
            .iter()
            .map(|c| {
                [c.iter().map(|z| Complex64::new(z.re, 0.0)).sum(), c.iter().map(|z| z * z).sum()]
            })
            .collect();
        let n = xs.len() as f64;
        for a in 0..2 {
            let mean: Complex64 = xs.iter().map(|x| x[a]).sum::<Complex64>() / n;
            assert!((all.trace_mean[a] - mean).norm() < 1e-14);
            for b in 0..2 {
                let mb: Complex64 = xs.iter().map(|x| x[b]).sum::<Complex64>() / n;
                let cm: Complex64 = xs.iter().map(|x| (x[a] - mean) * (x[b] - mb)).sum();
                assert!((all.trace_comoment[a * 2 + b] - cm).norm() < 1e-13);
            }
        }
        assert_eq!(all.samples, 9);
    }

    #[test]
    fn constant_observable_has_zero_comoment() {
        let o = Observables::default().with_trace("c", |_| Complex64::new(0.7, 0.0));
        let s = spec();
        let mut a = ReplicaStats::empty(&o);
        let mut b = ReplicaStats::empty(&o);
        for (k, c) in configs().iter().enumerate() {
            if k < 4 { a.record(&s, &o, c) } else { b.record(&s, &o, c) }
        }
        a.merge(&b);
        assert_eq!(a.trace_comoment[0], ZERO);
    }
}
