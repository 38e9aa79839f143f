//! Random channels and joints for cross-checks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::scalar::{lit, Real};

use super::{
    AuxSizes, ChannelSizes, DmChannel, DmError, DmEvaluator, DmJoint, JointLayout, SourceAlphabet,
};

/// A flat Dirichlet draw of length `n`.
pub fn dirichlet<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<T> {
    let draw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let sum: f64 = draw.iter().sum();
    draw.into_iter().map(|x| lit(x / sum)).collect()
}

/// A channel with a Dirichlet state pmf and Dirichlet kernel rows.
pub fn random_channel<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    sizes: ChannelSizes,
) -> Result<DmChannel<T>, DmError> {
    let state_pmf = dirichlet(rng, sizes.state);
    let row = sizes.relay_output * sizes.dest_output;
    let rows = sizes.kernel_len() / row;
    let kernel = (0..rows)
        .flat_map(|_| dirichlet::<T, _>(rng, row))
        .collect();
    DmChannel::new(sizes, state_pmf, kernel)
}

/// A split-source channel whose relay and destination links are drawn
/// separately, so it factorizes as the hyper-source model requires.
pub fn random_hyper_channel<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    sizes: ChannelSizes,
) -> Result<DmChannel<T>, DmError> {
    let (relay, dest) = match sizes.source {
        SourceAlphabet::Split { relay, dest } => (relay, dest),
        SourceAlphabet::Single(_) => {
            return Err(super::DmError::MissingVariable(
                super::Var::SourceRelayInput,
            ))
        }
    };
    let (n2, n3) = (sizes.relay_output, sizes.dest_output);
    let w2: Vec<T> = (0..sizes.state * relay)
        .flat_map(|_| dirichlet::<T, _>(rng, n2))
        .collect();
    let w3: Vec<T> = (0..sizes.state * dest * sizes.relay_input)
        .flat_map(|_| dirichlet::<T, _>(rng, n3))
        .collect();
    let state_pmf = dirichlet(rng, sizes.state);
    let x2n = sizes.relay_input;
    DmChannel::from_hyper_links(
        sizes,
        state_pmf,
        |s, x1r, y2| w2[(s * relay + x1r) * n2 + y2],
        |s, x1d, x2, y3| w3[((s * dest + x1d) * x2n + x2) * n3 + y3],
    )
}

impl<T: Real> JointLayout<T> {
    /// Free conditionals with every row a flat Dirichlet draw.
    pub fn sample_free<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<T>> {
        self.free_shapes()
            .iter()
            .map(|(_, rows, cols)| {
                (0..*rows)
                    .flat_map(|_| dirichlet::<T, _>(rng, *cols))
                    .collect()
            })
            .collect()
    }

    /// A random joint of this layout.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DmJoint<T>, DmError> {
        self.assemble(&self.sample_free(rng))
    }
}

/// A random joint of the evaluator's template on an all-binary channel with a
/// binary state, together with that channel.
pub fn random_instance<T: Real>(
    evaluator: DmEvaluator,
    seed: u64,
) -> Result<(DmChannel<T>, DmJoint<T>), DmError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let binary = |source| ChannelSizes {
        state: 2,
        source,
        relay_input: 2,
        relay_output: 2,
        dest_output: 2,
    };
    let channel = match evaluator {
        DmEvaluator::UbHyper => random_hyper_channel(
            &mut rng,
            binary(SourceAlphabet::Split { relay: 2, dest: 2 }),
        )?,
        _ => random_channel(&mut rng, binary(SourceAlphabet::Single(2)))?,
    };
    let layout = JointLayout::new(&channel, evaluator.template(), &AuxSizes::new())?;
    let joint = layout.sample(&mut rng)?;
    Ok((channel, joint))
}
