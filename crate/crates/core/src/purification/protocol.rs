//! Comparison and parity stages, full rounds and iterated runs.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;
use rand::Rng;

use super::{fidelity_recursion, keep_probability, success_probability, ProtocolConfig, RunMode, Scheme};
use crate::conditioning::{condition, Projector};
use crate::error::{Error, Result};
use crate::optics::{append_coherent, beam_splitter, detect, DetectorModel, Outcome};
use crate::rng::child_stream;
use crate::states::{cat, multimode_cat, quasi_bell, MixedState, QuasiBell, SuperposedState};

/// Probe amplitude on the second beam splitter, in units of the qubit
/// amplitude. A vacuum comparison port then sends `(a, -a)` to the two
/// probe detectors and a `+-sqrt(2) a` port sends `(2a, 0)` or `(0, -2a)`.
pub const PROBE_SCALE: f64 = SQRT_2;

/// Keep probability and normalized post-selected state.
#[derive(Clone, Debug)]
pub struct Conditioned {
    pub probability: f64,
    /// `None` when the outcome cannot occur.
    pub state: Option<MixedState>,
}

/// `F |target> + (1-F) |partner>`, where the partner has the other kind
/// and the same sign.
pub fn werner_ensemble(alpha: f64, fidelity: f64, target: QuasiBell) -> Result<MixedState> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::InvalidArgument("fidelity must lie in [0, 1]"));
    }
    let good = quasi_bell(alpha, target)?;
    let bad = quasi_bell(alpha, target.partner())?;
    MixedState::from_unnormalized(2, vec![(fidelity, good), (1.0 - fidelity, bad)])
}

/// `N(|a,a,a,a> + |-a,-a,-a,-a>)`.
pub fn b1_state(alpha: f64) -> Result<SuperposedState> {
    multimode_cat(alpha, &[1.0, 1.0, 1.0, 1.0], 1.0)
}

/// `N(|a,-a,a,-a> + |-a,a,-a,a>)`.
pub fn b2_state(alpha: f64) -> Result<SuperposedState> {
    multimode_cat(alpha, &[1.0, -1.0, 1.0, -1.0], 1.0)
}

/// Builds the first four-mode state from an even cat of amplitude `2a`
/// and three beam splitters fed with vacuum.
pub fn b1_from_beam_splitters(alpha: f64) -> Result<SuperposedState> {
    let mut s = cat(Complex64::new(2.0 * alpha, 0.0), 0.0)?;
    for _ in 0..3 {
        s = append_coherent(&s, Complex64::new(0.0, 0.0));
    }
    s = beam_splitter(&s, 0, 1)?;
    s = beam_splitter(&s, 0, 2)?;
    beam_splitter(&s, 1, 3)
}

/// `F |B1><B1| + (1-F) |B2><B2|`.
pub fn four_mode_ensemble(alpha: f64, fidelity: f64) -> Result<MixedState> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::InvalidArgument("fidelity must lie in [0, 1]"));
    }
    MixedState::from_unnormalized(4, vec![(fidelity, b1_state(alpha)?), (1.0 - fidelity, b2_state(alpha)?)])
}

fn copies(rho: &MixedState) -> Result<usize> {
    let m = rho.mode_count();
    if m < 2 || !m.is_multiple_of(2) {
        return Err(Error::InvalidArgument("comparison stage needs two copies of the same modes"));
    }
    Ok(m / 2)
}

/// Optics of the comparison stage: beam splitters between mode `m` and its
/// copy `m + n`, then each difference port mixed with a probe. Returns the
/// state and the detected modes (all of `n..3n`).
fn p1_optics(s: &SuperposedState, n: usize, alpha: f64) -> Result<SuperposedState> {
    let probe = Complex64::new(PROBE_SCALE * alpha, 0.0);
    let mut s = s.clone();
    for m in 0..n {
        s = beam_splitter(&s, m, m + n)?;
    }
    for m in 0..n {
        s = append_coherent(&s, probe);
        s = beam_splitter(&s, m + n, 2 * n + m)?;
    }
    Ok(s)
}

/// Comparison stage on `rho` over modes `(x_0..x_{n-1}, x'_0..x'_{n-1})`:
/// keep iff all `2n` probe-side detectors click. The kept state lives on
/// the sum ports, with amplitudes `sqrt(2) a`.
pub fn p1_round(rho: &MixedState, alpha: f64) -> Result<Conditioned> {
    let n = copies(rho)?;
    let after = rho.try_map(|s| p1_optics(s, n, alpha))?;
    let ops: Vec<(usize, Projector)> = (n..3 * n).map(|m| (m, Projector::Click)).collect();
    let c = condition(&after, &ops)?;
    Ok(Conditioned { probability: c.probability, state: c.conditioned })
}

/// [`p1_round`] on the eight-mode product of two four-mode ensembles.
pub fn multimode_purify(rho: &MixedState, alpha: f64) -> Result<Conditioned> {
    p1_round(rho, alpha)
}

fn p2_optics(s: &SuperposedState) -> Result<SuperposedState> {
    let vac = Complex64::new(0.0, 0.0);
    let s = append_coherent(&append_coherent(s, vac), vac);
    beam_splitter(&beam_splitter(&s, 0, 2)?, 1, 3)
}

/// Whether a parity pair `(k', l')` is kept for `target`: different parities
/// for minus-type targets, equal parities for plus-type.
fn parity_kept(target: QuasiBell, first_even: bool, second_even: bool) -> bool {
    (first_even == second_even) == target.is_plus()
}

fn merge(mode_count: usize, parts: Vec<(f64, MixedState)>) -> Option<MixedState> {
    let comps: Vec<(f64, SuperposedState)> = parts
        .into_iter()
        .flat_map(|(p, m)| m.components().iter().map(|(w, s)| (p * w, s.clone())).collect::<Vec<_>>())
        .collect();
    MixedState::from_unnormalized(mode_count, comps).ok()
}

/// Parity stage: each side mixes its mode with vacuum and measures the
/// parity of the second output.
pub fn p2_round(rho: &MixedState, target: QuasiBell) -> Result<Conditioned> {
    if rho.mode_count() != 2 {
        return Err(Error::ModeCountMismatch { expected: 2, found: rho.mode_count() });
    }
    let after = rho.try_map(p2_optics)?;
    let mut probability = 0.0;
    let mut parts = Vec::new();
    for (pk, ek) in [(Projector::Even, true), (Projector::Odd, false)] {
        for (pl, el) in [(Projector::Even, true), (Projector::Odd, false)] {
            if !parity_kept(target, ek, el) {
                continue;
            }
            let c = condition(&after, &[(2, pk), (3, pl)])?;
            probability += c.probability;
            if let Some(m) = c.conditioned {
                parts.push((c.probability, m));
            }
        }
    }
    Ok(Conditioned { probability, state: merge(2, parts) })
}

/// Comparison stage followed by the parity stage.
pub fn full_round(pair: &MixedState, alpha: f64, target: QuasiBell) -> Result<Conditioned> {
    if pair.mode_count() != 4 {
        return Err(Error::ModeCountMismatch { expected: 4, found: pair.mode_count() });
    }
    let first = p1_round(pair, alpha)?;
    let Some(mid) = first.state else {
        return Ok(Conditioned { probability: 0.0, state: None });
    };
    let second = p2_round(&mid, target)?;
    Ok(Conditioned { probability: first.probability * second.probability, state: second.state })
}

/// Total weight of the components of `rho` that are the ray `target`.
pub fn component_weight(rho: &MixedState, target: &SuperposedState) -> f64 {
    rho.components().iter().filter(|(_, s)| s.same_ray(target, 1e-9)).map(|(w, _)| w).sum()
}

/// Sampled result of one trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialOutcome {
    pub kept: bool,
    /// Fidelity of the post-selected state with the target; 0 when discarded.
    pub fidelity: f64,
}

#[derive(Clone, Debug)]
enum Node {
    Leaf(TrialOutcome),
    Branch(Vec<(f64, Node)>),
}

impl Node {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TrialOutcome {
        match self {
            Node::Leaf(t) => *t,
            Node::Branch(children) => children[pick(children.iter().map(|(p, _)| *p), rng)].1.sample(rng),
        }
    }
}

fn pick<R: Rng + ?Sized>(weights: impl Iterator<Item = f64> + Clone, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last = i;
        }
        acc += w;
        if u < acc {
            return i;
        }
    }
    last
}

const DISCARD: TrialOutcome = TrialOutcome { kept: false, fidelity: 0.0 };

/// Which stages a sampled round runs.
#[derive(Clone, Copy, Debug)]
enum Stages {
    Full(QuasiBell),
    ComparisonOnly,
}

/// Monte Carlo view of one round: the input component is drawn first, then
/// detectors fire one at a time, each outcome drawn from the exact
/// conditional distribution given the earlier ones.
///
/// The outcome tree is built once, so trials are cheap and the sampler can
/// be shared between threads.
#[derive(Clone, Debug)]
pub struct ProtocolSampler {
    inputs: Vec<(f64, Node)>,
}

impl ProtocolSampler {
    /// Sampler for a full round ([`full_round`]) on `pair`, scoring against
    /// `target` at amplitude `alpha`.
    pub fn full(pair: &MixedState, alpha: f64, target: QuasiBell) -> Result<Self> {
        let fid = quasi_bell(alpha, target)?;
        Self::build(pair, alpha, Stages::Full(target), &fid)
    }

    /// Sampler for a comparison stage alone, scoring against `target`
    /// (which lives at amplitude `sqrt(2) a`).
    pub fn comparison(pair: &MixedState, alpha: f64, target: &SuperposedState) -> Result<Self> {
        Self::build(pair, alpha, Stages::ComparisonOnly, target)
    }

    fn build(pair: &MixedState, alpha: f64, stages: Stages, target: &SuperposedState) -> Result<Self> {
        let n = copies(pair)?;
        let mut inputs = Vec::with_capacity(pair.components().len());
        for (w, s) in pair.components() {
            let optics = MixedState::from(p1_optics(s, n, alpha)?);
            inputs.push((*w, p1_tree(optics, 3 * n, n, stages, target)?));
        }
        Ok(Self { inputs })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TrialOutcome {
        let i = pick(self.inputs.iter().map(|(w, _)| *w), rng);
        self.inputs[i].1.sample(rng)
    }
}

/// Detects modes `lowest..top` from the highest down so earlier removals
/// do not shift the remaining indices.
fn p1_tree(rho: MixedState, top: usize, lowest: usize, stages: Stages, target: &SuperposedState) -> Result<Node> {
    if top == lowest {
        return match stages {
            Stages::ComparisonOnly => Ok(Node::Leaf(TrialOutcome { kept: true, fidelity: rho.fidelity(target)? })),
            Stages::Full(t) => p2_tree(rho.try_map(p2_optics)?, 4, t, target, (true, true)),
        };
    }
    let mut children = Vec::with_capacity(2);
    for d in detect(&rho, top - 1, DetectorModel::OnOff)? {
        let node = match (d.outcome, d.conditioned) {
            (Outcome::Click, Some(next)) => p1_tree(next, top - 1, lowest, stages, target)?,
            _ => Node::Leaf(DISCARD),
        };
        children.push((d.probability, node));
    }
    Ok(Node::Branch(children))
}

fn p2_tree(rho: MixedState, top: usize, target: QuasiBell, fid: &SuperposedState, seen: (bool, bool)) -> Result<Node> {
    let mut children = Vec::with_capacity(2);
    for d in detect(&rho, top - 1, DetectorModel::Parity)? {
        let even = d.outcome == Outcome::Even;
        let node = match d.conditioned {
            None => Node::Leaf(DISCARD),
            Some(next) if top == 4 => p2_tree(next, 3, target, fid, (seen.0, even))?,
            Some(next) => {
                if parity_kept(target, even, seen.1) {
                    Node::Leaf(TrialOutcome { kept: true, fidelity: next.fidelity(fid)? })
                } else {
                    Node::Leaf(DISCARD)
                }
            }
        };
        children.push((d.probability, node));
    }
    Ok(Node::Branch(children))
}

/// Running counts for a batch of trials; merging is associative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tally {
    pub trials: u64,
    pub kept: u64,
    pub fidelity_sum: f64,
}

impl Tally {
    pub fn record(&mut self, t: TrialOutcome) {
        self.trials += 1;
        if t.kept {
            self.kept += 1;
            self.fidelity_sum += t.fidelity;
        }
    }

    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            trials: self.trials + other.trials,
            kept: self.kept + other.kept,
            fidelity_sum: self.fidelity_sum + other.fidelity_sum,
        }
    }

    /// Compares with the exact keep probability and post-selected fidelity.
    pub fn finish(&self, exact_rate: f64, exact_fidelity: f64) -> Empirical {
        let n = self.trials.max(1) as f64;
        let rate = self.kept as f64 / n;
        let k = self.kept.max(1) as f64;
        let fidelity = if self.kept == 0 { 0.0 } else { self.fidelity_sum / k };
        Empirical {
            trials: self.trials,
            kept: self.kept,
            rate,
            rate_sigma: (exact_rate * (1.0 - exact_rate) / n).sqrt(),
            fidelity,
            fidelity_sigma: (exact_fidelity * (1.0 - exact_fidelity) / k).sqrt(),
            exact_rate,
            exact_fidelity,
        }
    }
}

/// Runs trials `range` with per-trial streams derived from `seed`, so any
/// split of the range gives the same merged tally.
pub fn run_trials(sampler: &ProtocolSampler, seed: u64, range: core::ops::Range<u64>) -> Tally {
    let mut t = Tally::default();
    for i in range {
        t.record(sampler.sample(&mut child_stream(seed, i)));
    }
    t
}

/// Monte Carlo estimates with binomial standard errors taken at the exact values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Empirical {
    pub trials: u64,
    pub kept: u64,
    pub rate: f64,
    pub rate_sigma: f64,
    pub fidelity: f64,
    pub fidelity_sigma: f64,
    pub exact_rate: f64,
    pub exact_fidelity: f64,
}

impl Empirical {
    /// Both estimates lie within `k` standard errors of the exact values.
    /// A zero standard error demands exact agreement.
    pub fn within(&self, k: f64) -> bool {
        let ok = |est: f64, exact: f64, sigma: f64| (est - exact).abs() <= k * sigma + 1e-12;
        ok(self.rate, self.exact_rate, self.rate_sigma) && ok(self.fidelity, self.exact_fidelity, self.fidelity_sigma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundReport {
    /// 1-based round index.
    pub round: usize,
    pub fidelity_before: f64,
    /// Fidelity of the post-selected state with the target.
    pub fidelity_after: f64,
    /// Weight of the target component in the post-selected mixture.
    pub weight_after: f64,
    /// The recursion iterated from the initial weight.
    pub fidelity_recursion: f64,
    pub success_probability: f64,
    /// Published closed form at the round's input weight and amplitude.
    pub success_formula: Option<f64>,
    /// Derived closed form, see [`keep_probability`].
    pub success_closed_form: Option<f64>,
    pub amplitude_after: f64,
    pub empirical: Option<Empirical>,
}

/// Runs `cfg.iterations` rounds starting from the two-state Werner ensemble
/// with weight `f0`. Each round feeds two copies of the previous output.
/// Monte Carlo mode samples each round serially.
pub fn run_protocol(cfg: &ProtocolConfig, f0: f64) -> Result<Vec<RoundReport>> {
    run_protocol_with(cfg, f0, |sampler, seed, trials| run_trials(sampler, seed, 0..trials))
}

/// [`run_protocol`] with a caller-supplied trial runner (for example a
/// parallel one). The runner must return the tally of trials `0..trials`.
pub fn run_protocol_with(
    cfg: &ProtocolConfig,
    f0: f64,
    runner: impl FnMut(&ProtocolSampler, u64, u64) -> Tally,
) -> Result<Vec<RoundReport>> {
    Ok(run_protocol_states(cfg, f0, runner)?.0)
}

/// [`run_protocol_with`], also returning the state kept after the last round.
pub fn run_protocol_states(
    cfg: &ProtocolConfig,
    f0: f64,
    mut runner: impl FnMut(&ProtocolSampler, u64, u64) -> Tally,
) -> Result<(Vec<RoundReport>, MixedState)> {
    cfg.validate()?;
    if !(0.0..=1.0).contains(&f0) {
        return Err(Error::InvalidArgument("initial fidelity must lie in [0, 1]"));
    }
    let mut alpha = cfg.alpha;
    let mut rho = werner_ensemble(alpha, f0, cfg.target)?;
    let mut weight = f0;
    let mut recursion = f0;
    let mut out = Vec::with_capacity(cfg.iterations);
    for round in 1..=cfg.iterations {
        let target_now = quasi_bell(alpha, cfg.target)?;
        let fidelity_before = rho.fidelity(&target_now)?;
        let pair = rho.tensor(&rho);
        let next_alpha = match cfg.scheme {
            Scheme::Full => alpha,
            Scheme::SimpleP1 => SQRT_2 * alpha,
        };
        let target_next = quasi_bell(next_alpha, cfg.target)?;
        let result = match cfg.scheme {
            Scheme::Full => full_round(&pair, alpha, cfg.target)?,
            Scheme::SimpleP1 => p1_round(&pair, alpha)?,
        };
        let Some(state) = result.state else {
            return Err(Error::ImpossibleOutcome);
        };
        let fidelity_after = state.fidelity(&target_next)?;
        let weight_after = component_weight(&state, &target_next);
        let empirical = match cfg.mode {
            RunMode::Exact => None,
            RunMode::MonteCarlo { trials, root_seed } => {
                let sampler = match cfg.scheme {
                    Scheme::Full => ProtocolSampler::full(&pair, alpha, cfg.target)?,
                    Scheme::SimpleP1 => ProtocolSampler::comparison(&pair, alpha, &target_next)?,
                };
                let seed = crate::rng::child_seed(root_seed, round as u64);
                Some(runner(&sampler, seed, trials).finish(result.probability, fidelity_after))
            }
        };
        recursion = fidelity_recursion(recursion);
        out.push(RoundReport {
            round,
            fidelity_before,
            fidelity_after,
            weight_after,
            fidelity_recursion: recursion,
            success_probability: result.probability,
            success_formula: Some(success_probability(weight, alpha, cfg.scheme)),
            success_closed_form: Some(keep_probability(weight, alpha, cfg.scheme)),
            amplitude_after: state.max_amplitude(),
            empirical,
        });
        weight = weight_after;
        alpha = next_alpha;
        rho = state;
    }
    Ok((out, rho))
}

/// Iterates the four-mode scheme from `F |B1> + (1-F) |B2>`.
pub fn run_multimode(alpha: f64, f0: f64, iterations: usize) -> Result<Vec<RoundReport>> {
    Ok(run_multimode_states(alpha, f0, iterations)?.0)
}

/// [`run_multimode`], also returning the state kept after the last round.
pub fn run_multimode_states(alpha: f64, f0: f64, iterations: usize) -> Result<(Vec<RoundReport>, MixedState)> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument("alpha must be positive"));
    }
    let mut a = alpha;
    let mut rho = four_mode_ensemble(a, f0)?;
    let mut recursion = f0;
    let mut out = Vec::with_capacity(iterations);
    for round in 1..=iterations {
        let fidelity_before = rho.fidelity(&b1_state(a)?)?;
        let result = multimode_purify(&rho.tensor(&rho), a)?;
        let Some(state) = result.state else {
            return Err(Error::ImpossibleOutcome);
        };
        a *= SQRT_2;
        let target = b1_state(a)?;
        recursion = fidelity_recursion(recursion);
        out.push(RoundReport {
            round,
            fidelity_before,
            fidelity_after: state.fidelity(&target)?,
            weight_after: component_weight(&state, &target),
            fidelity_recursion: recursion,
            success_probability: result.probability,
            success_formula: None,
            success_closed_form: None,
            amplitude_after: state.max_amplitude(),
            empirical: None,
        });
        rho = state;
    }
    Ok((out, rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::purification::{keep_probability, p1_keep_probability, p2_keep_probability};

    fn pair(alpha: f64, f: f64, target: QuasiBell) -> MixedState {
        let w = werner_ensemble(alpha, f, target).unwrap();
        w.tensor(&w)
    }

    #[test]
    fn mismatched_pairs_are_always_discarded() {
        let alpha = 1.0;
        let a = MixedState::pure(quasi_bell(alpha, QuasiBell::PhiMinus).unwrap()).unwrap();
        let b = MixedState::pure(quasi_bell(alpha, QuasiBell::PsiMinus).unwrap()).unwrap();
        let r = p1_round(&a.tensor(&b), alpha).unwrap();
        assert_eq!(r.probability, 0.0);
        assert!(r.state.is_none());
    }

    #[test]
    fn pure_input_doubles_amplitude() {
        for alpha in [0.5, 1.0, 2.0] {
            let r = p1_round(&pair(alpha, 1.0, QuasiBell::PhiMinus), alpha).unwrap();
            let out = r.state.unwrap();
            let target = quasi_bell(SQRT_2 * alpha, QuasiBell::PhiPlus).unwrap();
            assert!((out.fidelity(&target).unwrap() - 1.0).abs() < 1e-12);
            assert!((r.probability - p1_keep_probability(alpha, false)).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_stage_restores_targets() {
        let alpha = 0.9;
        for (input, target) in [
            (QuasiBell::PhiPlus, QuasiBell::PhiMinus),
            (QuasiBell::PsiPlus, QuasiBell::PsiMinus),
            (QuasiBell::PhiPlus, QuasiBell::PhiPlus),
            (QuasiBell::PsiPlus, QuasiBell::PsiPlus),
        ] {
            let s = MixedState::pure(quasi_bell(SQRT_2 * alpha, input).unwrap()).unwrap();
            let r = p2_round(&s, target).unwrap();
            let f = r.state.unwrap().fidelity(&quasi_bell(alpha, target).unwrap()).unwrap();
            assert!((f - 1.0).abs() < 1e-12, "{input:?} -> {target:?}: {f}");
            if !target.is_plus() {
                assert!((r.probability - p2_keep_probability(alpha)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn full_round_follows_recursion() {
        for alpha in [0.5, 1.0, 2.0] {
            for f in [0.55, 0.667, 0.75, 0.9] {
                let r = full_round(&pair(alpha, f, QuasiBell::PhiMinus), alpha, QuasiBell::PhiMinus).unwrap();
                let out = r.state.unwrap();
                let fid = out.fidelity(&quasi_bell(alpha, QuasiBell::PhiMinus).unwrap()).unwrap();
                assert!((fid - fidelity_recursion(f)).abs() < 1e-10, "{alpha} {f}: {fid}");
                assert!(fid > f);
                assert!((r.probability - keep_probability(f, alpha, Scheme::Full)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn simplified_round_keep_probability() {
        for alpha in [0.7, 1.5] {
            let f = 0.8;
            let r = p1_round(&pair(alpha, f, QuasiBell::PhiPlus), alpha).unwrap();
            assert!((r.probability - keep_probability(f, alpha, Scheme::SimpleP1)).abs() < 1e-12);
            let w = component_weight(&r.state.unwrap(), &quasi_bell(SQRT_2 * alpha, QuasiBell::PhiPlus).unwrap());
            assert!((w - fidelity_recursion(f)).abs() < 1e-12);
        }
    }

    #[test]
    fn four_mode_states() {
        for alpha in [0.6, 1.0, 2.0] {
            let built = b1_from_beam_splitters(alpha).unwrap();
            assert!(built.same_ray(&b1_state(alpha).unwrap(), 1e-12));
        }
        let alpha = 2.0;
        let rho = four_mode_ensemble(alpha, 0.7).unwrap();
        let r = multimode_purify(&rho.tensor(&rho), alpha).unwrap();
        let out = r.state.unwrap();
        let f = out.fidelity(&b1_state(SQRT_2 * alpha).unwrap()).unwrap();
        assert!((f - 0.49 / 0.58).abs() < 1e-9);
        let pure = four_mode_ensemble(alpha, 1.0).unwrap();
        let r = multimode_purify(&pure.tensor(&pure), alpha).unwrap();
        assert!((r.state.unwrap().fidelity(&b1_state(SQRT_2 * alpha).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_mode_multimode_is_p1() {
        let alpha = 1.2;
        let p = pair(alpha, 0.8, QuasiBell::PhiMinus);
        let a = multimode_purify(&p, alpha).unwrap();
        let b = p1_round(&p, alpha).unwrap();
        assert_eq!(a.probability, b.probability);
        assert!(p1_round(
            &MixedState::pure(b1_state(1.0).unwrap())
                .unwrap()
                .tensor(&MixedState::pure(quasi_bell(1.0, QuasiBell::PhiPlus).unwrap()).unwrap()),
            1.0
        )
        .is_ok());
        assert!(p1_round(&MixedState::pure(cat(Complex64::new(1.0, 0.0), 0.0).unwrap()).unwrap(), 1.0).is_err());
    }

    #[test]
    fn runs_track_the_recursion() {
        let cfg = ProtocolConfig {
            alpha: 2.0,
            scheme: Scheme::Full,
            target: QuasiBell::PhiMinus,
            iterations: 3,
            mode: RunMode::Exact,
        };
        let rows = run_protocol(&cfg, 0.75).unwrap();
        let expected = [0.9, 0.987_804_878_048_780_5, 0.999_847_607_436_757];
        for (row, e) in rows.iter().zip(expected) {
            assert!((row.fidelity_after - e).abs() < 1e-10);
            assert!((row.fidelity_recursion - e).abs() < 1e-12);
            assert!((row.amplitude_after - 2.0).abs() < 1e-12);
        }
        let flat = run_protocol(&cfg, 0.5).unwrap();
        assert!(flat.iter().all(|r| (r.fidelity_after - 0.5).abs() < 1e-12));
    }

    #[test]
    fn simplified_run_grows_amplitude() {
        let cfg = ProtocolConfig {
            alpha: 2.0,
            scheme: Scheme::SimpleP1,
            target: QuasiBell::PhiPlus,
            iterations: 3,
            mode: RunMode::Exact,
        };
        let rows = run_protocol(&cfg, 2.0 / 3.0).unwrap();
        let last = rows.last().unwrap();
        assert!((last.amplitude_after - 2.0 * 2f64.powf(1.5)).abs() < 1e-12);
        assert!((last.weight_after - 0.996_108_949_416_342_3).abs() < 1e-12);
        assert!((last.fidelity_after - last.weight_after).abs() < 1e-9);
        for (n, row) in rows.iter().enumerate() {
            assert!((row.amplitude_after - 2.0 * 2f64.powf((n + 1) as f64 / 2.0)).abs() < 1e-12);
        }
        let pure = run_protocol(&cfg, 1.0).unwrap();
        assert!(pure.iter().all(|r| (r.weight_after - 1.0).abs() < 1e-15));
        let half = run_protocol(&cfg, 0.5).unwrap();
        assert!(half.iter().all(|r| (r.weight_after - 0.5).abs() < 1e-12));
    }

    #[test]
    fn monte_carlo_is_reproducible_and_consistent() {
        let alpha = 1.0;
        let p = pair(alpha, 0.75, QuasiBell::PhiMinus);
        let sampler = ProtocolSampler::full(&p, alpha, QuasiBell::PhiMinus).unwrap();
        let a = run_trials(&sampler, 11, 0..4000);
        let b = run_trials(&sampler, 11, 0..1500).merge(run_trials(&sampler, 11, 1500..4000));
        assert_eq!(a, b);
        let exact = full_round(&p, alpha, QuasiBell::PhiMinus).unwrap();
        let f = exact.state.unwrap().fidelity(&quasi_bell(alpha, QuasiBell::PhiMinus).unwrap()).unwrap();
        assert!(a.finish(exact.probability, f).within(4.0));
    }
}
