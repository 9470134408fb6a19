//! Seeded Monte-Carlo engine for the randomness-amplification protocol.
//!
//! Each round Alice reads one bit from a weak source and encodes it on her
//! qubit (bit 0 as `σ_x`, bit 1 as the identity). She then runs the dilated
//! PT map and post-selects on the ancilla. On success Bob measures `σ_y` and
//! decodes his outcome into a bit. Rounds whose post-selection failed are
//! announced and discarded (sifting).
//!
//! Randomness is split into two independent streams. The source stream drives
//! only Alice's bits. Each round also gets its own quantum stream, seeded by
//! [`mix`]`(mix(seed, QUANTUM), round)`, so rounds can be evaluated in any
//! order or in parallel and still give identical records.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dilation::Postselection;
use crate::dynamics::PtMap;
use crate::error::{invalid, Result};
use crate::linalg::{ComplexMatrix, I, ONE};
use crate::quantum::{DensityMatrix, PureState};
use crate::states::{AliceOp, StateSpec};
use std::f64::consts::FRAC_PI_2;

const SOURCE_STREAM: u64 = 0x5352_435f_4249_5453;
const QUANTUM_STREAM: u64 = 0x5155_414e_5455_4d21;

/// SplitMix64 step of `seed` advanced `index + 1` times. Distinct indices
/// under one seed give decorrelated 64-bit values.
pub fn mix(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A weak bit source. Every bit has conditional probability within
/// `[1/2 - ε, 1/2 + ε]` given all earlier bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "epsilon", rename_all = "kebab-case")]
pub enum SourceModel {
    Fair,
    /// Independent bits with `P(1) = 1/2 + ε`.
    IidBiased(f64),
    /// First bit fair, then each bit repeats its predecessor with probability `1/2 + ε`.
    MarkovAdversary(f64),
}

impl SourceModel {
    pub fn epsilon(&self) -> f64 {
        match *self {
            SourceModel::Fair => 0.0,
            SourceModel::IidBiased(e) | SourceModel::MarkovAdversary(e) => e,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.epsilon();
        if !(0.0..=0.5).contains(&e) {
            return invalid(format!("source bias ε = {e} outside [0, 1/2]"));
        }
        Ok(())
    }
}

/// `n` bits from `source`, deterministic in `(source, seed)`.
pub fn draw_bits(source: SourceModel, n: usize, seed: u64) -> Result<Vec<u8>> {
    source.validate()?;
    if n == 0 {
        return invalid("draw_bits needs n >= 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, SOURCE_STREAM));
    let mut bits = Vec::with_capacity(n);
    match source {
        SourceModel::Fair => bits.extend((0..n).map(|_| rng.random_bool(0.5) as u8)),
        SourceModel::IidBiased(e) => bits.extend((0..n).map(|_| rng.random_bool(0.5 + e) as u8)),
        SourceModel::MarkovAdversary(e) => {
            let mut prev = rng.random_bool(0.5) as u8;
            bits.push(prev);
            for _ in 1..n {
                prev = if rng.random_bool(0.5 + e) { prev } else { 1 - prev };
                bits.push(prev);
            }
        }
    }
    Ok(bits)
}

/// Which bit Bob writes down for each `σ_y` outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeMap {
    /// Bit decoded from the `|+y⟩` outcome; `|-y⟩` decodes to the other bit.
    pub plus_y: u8,
}

impl Default for DecodeMap {
    fn default() -> Self {
        Self { plus_y: Self::bit_for(AliceOp::FlipX) }
    }
}

impl DecodeMap {
    pub fn bit_for(op: AliceOp) -> u8 {
        match op {
            AliceOp::FlipX => 0,
            AliceOp::Identity => 1,
        }
    }

    pub fn op_for(bit: u8) -> AliceOp {
        if bit == 0 {
            AliceOp::FlipX
        } else {
            AliceOp::Identity
        }
    }

    /// Decoded bit for Bob's outcome (0 = `|+y⟩`, 1 = `|-y⟩`).
    pub fn decode(&self, outcome: u8) -> u8 {
        if outcome == 0 {
            self.plus_y
        } else {
            1 - self.plus_y
        }
    }

    /// Derives the map from a noiseless probe: `Φ⁺` under `map` at the
    /// exceptional point, where Bob's conditional states are pure. `|+y⟩`
    /// decodes to whichever operation makes it more likely. A tie keeps the
    /// default.
    pub fn calibrate(map: PtMap) -> Result<Self> {
        let probe = ConditionalBob::new(&StateSpec::PhiPlus.build()?, FRAC_PI_2, map)?;
        let plus_flip = probe.plus_y[op_index(AliceOp::FlipX)];
        let plus_id = probe.plus_y[op_index(AliceOp::Identity)];
        Ok(if (plus_flip - plus_id).abs() < 1e-12 {
            Self::default()
        } else if plus_flip > plus_id {
            Self { plus_y: Self::bit_for(AliceOp::FlipX) }
        } else {
            Self { plus_y: Self::bit_for(AliceOp::Identity) }
        })
    }
}

fn op_index(op: AliceOp) -> usize {
    match op {
        AliceOp::Identity => 0,
        AliceOp::FlipX => 1,
    }
}

/// Success probability and Bob's `|+y⟩` probability for each of Alice's operations.
#[derive(Debug, Clone, Copy)]
struct ConditionalBob {
    success: [f64; 2],
    plus_y: [f64; 2],
}

impl ConditionalBob {
    fn new(rho: &DensityMatrix, alpha: f64, map: PtMap) -> Result<Self> {
        if rho.dim() != 4 {
            return invalid("the protocol runs on two-qubit states");
        }
        let v = map.operator(2, alpha)?;
        let plus = PureState::normalized(vec![ONE, I])?;
        let bob_plus = ComplexMatrix::identity(2).kron(plus.projector().matrix());
        let mut out = Self { success: [0.0; 2], plus_y: [0.0; 2] };
        for op in AliceOp::BOTH {
            let post = Postselection::prepare(rho, &(&v * &op.matrix(2)))?;
            let k = op_index(op);
            out.success[k] = post.success_prob;
            out.plus_y[k] = post.success_state.expectation(&bob_plus).clamp(0.0, 1.0);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub state: StateSpec,
    pub alpha: f64,
    pub rounds: usize,
    pub source: SourceModel,
    pub seed: u64,
    /// `None` calibrates from a probe run.
    pub decode: Option<DecodeMap>,
    pub map: PtMap,
}

impl ProtocolConfig {
    pub fn new(state: StateSpec, alpha: f64, rounds: usize, source: SourceModel, seed: u64) -> Self {
        Self { state, alpha, rounds, source, seed, decode: None, map: PtMap::SpecificTime }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return invalid("rounds must be at least 1");
        }
        if !self.alpha.is_finite() {
            return invalid(format!("alpha = {} is not finite", self.alpha));
        }
        if self.state.local_dim() != 2 {
            return invalid(format!("the protocol runs on qubit pairs, got {}", self.state));
        }
        self.source.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub input_bit: u8,
    pub alice_op: AliceOp,
    pub success: bool,
    /// 0 = `|+y⟩`, 1 = `|-y⟩`; present iff the round succeeded.
    pub bob_outcome: Option<u8>,
    pub decoded_bit: Option<u8>,
    pub kept: bool,
}

/// Aggregate statistics. Rates that need at least one kept round are `None`
/// when nothing was kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolStats {
    pub rounds: usize,
    pub sifted_length: usize,
    pub success_rate: f64,
    pub agreement_rate: Option<f64>,
    /// `|p̂₁ - 1/2|` of the sifted string.
    pub output_bias: Option<f64>,
    /// Plug-in estimate `-log₂ max(p̂₀, p̂₁)` of the sifted string.
    pub min_entropy_per_bit: Option<f64>,
    pub equality_certified: bool,
}

pub fn run_protocol(cfg: &ProtocolConfig) -> Result<(ProtocolStats, Vec<RoundRecord>)> {
    cfg.validate()?;
    let rho = cfg.state.build()?;
    let probs = ConditionalBob::new(&rho, cfg.alpha, cfg.map)?;
    let decode = match cfg.decode {
        Some(d) => d,
        None => DecodeMap::calibrate(cfg.map)?,
    };
    let bits = draw_bits(cfg.source, cfg.rounds, cfg.seed)?;
    let quantum = mix(cfg.seed, QUANTUM_STREAM);
    let records: Vec<RoundRecord> = bits
        .par_iter()
        .enumerate()
        .map(|(i, &bit)| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(quantum, i as u64));
            let op = DecodeMap::op_for(bit);
            let k = op_index(op);
            let success = rng.random::<f64>() < probs.success[k];
            let bob_outcome = success.then(|| u8::from(rng.random::<f64>() >= probs.plus_y[k]));
            RoundRecord {
                input_bit: bit,
                alice_op: op,
                success,
                bob_outcome,
                decoded_bit: bob_outcome.map(|o| decode.decode(o)),
                kept: success,
            }
        })
        .collect();
    let stats = analyze(&records)?;
    Ok((stats, records))
}

pub fn analyze(records: &[RoundRecord]) -> Result<ProtocolStats> {
    if records.is_empty() {
        return invalid("no protocol rounds to analyze");
    }
    let rounds = records.len();
    let (mut kept, mut successes, mut agree, mut ones) = (0usize, 0usize, 0usize, 0usize);
    for r in records {
        successes += r.success as usize;
        if let (true, Some(bit)) = (r.kept, r.decoded_bit) {
            kept += 1;
            agree += (bit == r.input_bit) as usize;
            ones += bit as usize;
        }
    }
    let rate = |x: usize| (kept > 0).then(|| x as f64 / kept as f64);
    let agreement_rate = rate(agree);
    let p1 = rate(ones);
    Ok(ProtocolStats {
        rounds,
        sifted_length: kept,
        success_rate: successes as f64 / rounds as f64,
        agreement_rate,
        output_bias: p1.map(|p| (p - 0.5).abs()),
        min_entropy_per_bit: p1.map(|p| -p.max(1.0 - p).log2()),
        equality_certified: kept > 0 && agree == kept,
    })
}

/// True iff every kept round decoded to Alice's input bit.
pub fn certify_source(cfg: &ProtocolConfig) -> Result<bool> {
    Ok(run_protocol(cfg)?.0.equality_certified)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_sigma(n: usize, p: f64) -> f64 {
        3.0 * (p * (1.0 - p) / n as f64).sqrt()
    }

    fn freq_ones(bits: &[u8]) -> f64 {
        bits.iter().map(|&b| b as f64).sum::<f64>() / bits.len() as f64
    }

    #[test]
    fn mix_separates_indices() {
        let v: Vec<u64> = (0..1000).map(|i| mix(7, i)).collect();
        let mut sorted = v.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), v.len());
        assert_ne!(mix(1, 0), mix(2, 0));
    }

    #[test]
    fn source_frequencies() {
        let n = 100_000;
        let fair = draw_bits(SourceModel::Fair, n, 3).unwrap();
        assert!((freq_ones(&fair) - 0.5).abs() < three_sigma(n, 0.5));

        let biased = draw_bits(SourceModel::IidBiased(0.2), n, 3).unwrap();
        assert!((freq_ones(&biased) - 0.7).abs() < three_sigma(n, 0.7));

        let constant = draw_bits(SourceModel::IidBiased(0.5), 1000, 3).unwrap();
        assert!(constant.iter().all(|&b| b == 1));

        let markov = draw_bits(SourceModel::MarkovAdversary(0.2), n, 3).unwrap();
        let repeats = markov.windows(2).filter(|w| w[0] == w[1]).count();
        assert!((repeats as f64 / (n - 1) as f64 - 0.7).abs() < three_sigma(n - 1, 0.7));
    }

    #[test]
    fn source_rejects_bad_input() {
        assert!(draw_bits(SourceModel::IidBiased(0.6), 10, 0).is_err());
        assert!(draw_bits(SourceModel::MarkovAdversary(-0.1), 10, 0).is_err());
        assert!(draw_bits(SourceModel::Fair, 0, 0).is_err());
    }

    #[test]
    fn calibration_matches_exceptional_point_states() {
        assert_eq!(DecodeMap::calibrate(PtMap::SpecificTime).unwrap(), DecodeMap::default());
        assert_eq!(DecodeMap::default().decode(0), 0);
        assert_eq!(DecodeMap::default().decode(1), 1);
    }

    #[test]
    fn phi_plus_at_exceptional_point_is_certified() {
        let n = 100_000;
        let cfg = ProtocolConfig::new(StateSpec::PhiPlus, FRAC_PI_2, n, SourceModel::IidBiased(0.2), 42);
        let (stats, records) = run_protocol(&cfg).unwrap();
        assert_eq!(stats.agreement_rate, Some(1.0));
        assert!(stats.equality_certified);
        assert!((stats.sifted_length as f64 - n as f64 / 2.0).abs() < 3.0 * (n as f64 * 0.25).sqrt());
        assert!(records.iter().all(|r| r.kept == r.success && r.bob_outcome.is_some() == r.success));

        // Success is independent of the input bit.
        let ones: Vec<_> = records.iter().filter(|r| r.input_bit == 1).collect();
        let zeros: Vec<_> = records.iter().filter(|r| r.input_bit == 0).collect();
        let rate = |v: &[&RoundRecord]| v.iter().filter(|r| r.success).count() as f64 / v.len() as f64;
        let sigma = (0.25 / ones.len() as f64 + 0.25 / zeros.len() as f64).sqrt();
        assert!((rate(&ones) - rate(&zeros)).abs() < 3.0 * sigma);
    }

    #[test]
    fn hermitian_control_learns_nothing() {
        let n = 20_000;
        let cfg = ProtocolConfig::new(StateSpec::PhiPlus, 0.0, n, SourceModel::Fair, 9);
        let (stats, _) = run_protocol(&cfg).unwrap();
        assert_eq!(stats.success_rate, 1.0);
        assert!((stats.agreement_rate.unwrap() - 0.5).abs() < three_sigma(n, 0.5));
    }

    #[test]
    fn werner_agreement_tracks_gap() {
        let (p, alpha, n) = (0.8, 0.45 * std::f64::consts::PI, 40_000);
        let spec = StateSpec::Werner { p };
        let cfg = ProtocolConfig::new(spec, alpha, n, SourceModel::Fair, 11);
        let (stats, _) = run_protocol(&cfg).unwrap();
        let s = alpha.sin();
        let expected = 0.5 + p * s / (1.0 + s * s);
        let got = stats.agreement_rate.unwrap();
        assert!(got > 0.5 && got < 1.0);
        assert!((got - expected).abs() < three_sigma(stats.sifted_length, expected));
    }

    #[test]
    fn certification_rejects_noisy_and_product_states() {
        let werner = ProtocolConfig::new(StateSpec::Werner { p: 0.9 }, FRAC_PI_2, 10_000, SourceModel::Fair, 5);
        assert!(!certify_source(&werner).unwrap());
        let product = StateSpec::Product { a: [0.0; 3], b: [0.0; 3] };
        let cfg = ProtocolConfig::new(product, 1.0, 10_000, SourceModel::Fair, 5);
        assert!(!certify_source(&cfg).unwrap());
        let cfg = ProtocolConfig::new(StateSpec::PhiPlus, FRAC_PI_2, 1000, SourceModel::MarkovAdversary(0.3), 5);
        assert!(certify_source(&cfg).unwrap());
    }

    #[test]
    fn analyze_examples() {
        let rec = |bit: u8, decoded: Option<u8>| RoundRecord {
            input_bit: bit,
            alice_op: DecodeMap::op_for(bit),
            success: decoded.is_some(),
            bob_outcome: decoded,
            decoded_bit: decoded,
            kept: decoded.is_some(),
        };
        let agree: Vec<_> = [0, 1, 1, 0].iter().map(|&b| rec(b, Some(b))).collect();
        let s = analyze(&agree).unwrap();
        assert_eq!(s.agreement_rate, Some(1.0));
        assert!(s.equality_certified);
        assert_eq!(s.min_entropy_per_bit, Some(1.0));
        assert_eq!(s.output_bias, Some(0.0));

        let skewed: Vec<_> = [1, 1, 1, 0].iter().map(|&b| rec(b, Some(b))).collect();
        let h = analyze(&skewed).unwrap().min_entropy_per_bit.unwrap();
        assert!((h - 0.415_037_499_278_843_8).abs() < 1e-12);

        let none = analyze(&[rec(1, None), rec(0, None)]).unwrap();
        assert_eq!(none.sifted_length, 0);
        assert_eq!(none.agreement_rate, None);
        assert!(!none.equality_certified);
        assert!(analyze(&[]).is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = ProtocolConfig::new(StateSpec::Werner { p: 0.7 }, 1.2, 5000, SourceModel::MarkovAdversary(0.1), 77);
        let a = run_protocol(&cfg).unwrap();
        let b = run_protocol(&cfg).unwrap();
        assert_eq!(a, b);
        let other = ProtocolConfig { seed: 78, ..cfg };
        assert_ne!(run_protocol(&other).unwrap().1, a.1);
    }

    #[test]
    fn qutrit_states_are_rejected() {
        let cfg = ProtocolConfig::new(StateSpec::WernerLike { dim: 3, p: 0.5 }, 1.0, 10, SourceModel::Fair, 0);
        assert!(run_protocol(&cfg).is_err());
    }
}
