//! Independent recomputation of the discrete rate expressions.
//!
//! Each mutual information is computed by one pass over the joint that
//! accumulates the needed marginals in ordered maps, followed by a direct sum of
//! `p(a,b,c) log p(a,b,c) p(c) / (p(a,c) p(b,c))`. Nothing here shares code
//! with the entropy-based evaluators.

use std::collections::BTreeMap;

use crate::scalar::Real;

use super::{DmError, DmEvaluator, DmJoint, Var};

type Key = Vec<usize>;

/// `I(A;B|C)` by direct summation, in `f64`.
pub fn summation_mi<T: Real>(
    joint: &DmJoint<T>,
    a: &[Var],
    b: &[Var],
    c: &[Var],
) -> Result<f64, DmError> {
    let vars = joint.variables();
    let sizes = joint.sizes();
    let locate = |set: &[Var]| -> Result<Vec<usize>, DmError> {
        set.iter()
            .map(|v| {
                vars.iter()
                    .position(|x| x == v)
                    .ok_or(DmError::MissingVariable(*v))
            })
            .collect()
    };
    let (ia, ib, ic) = (locate(a)?, locate(b)?, locate(c)?);
    let mut p_abc: BTreeMap<(Key, Key, Key), f64> = BTreeMap::new();
    let mut p_ac: BTreeMap<(Key, Key), f64> = BTreeMap::new();
    let mut p_bc: BTreeMap<(Key, Key), f64> = BTreeMap::new();
    let mut p_c: BTreeMap<Key, f64> = BTreeMap::new();
    let mut digits = vec![0usize; sizes.len()];
    for &p in joint.probabilities() {
        let p = p.to_f64_lossy();
        if p > 0.0 {
            let pick = |idx: &[usize]| idx.iter().map(|&i| digits[i]).collect::<Key>();
            let (ka, kb, kc) = (pick(&ia), pick(&ib), pick(&ic));
            *p_abc
                .entry((ka.clone(), kb.clone(), kc.clone()))
                .or_default() += p;
            *p_ac.entry((ka, kc.clone())).or_default() += p;
            *p_bc.entry((kb, kc.clone())).or_default() += p;
            *p_c.entry(kc).or_default() += p;
        }
        for d in (0..sizes.len()).rev() {
            digits[d] += 1;
            if digits[d] < sizes[d] {
                break;
            }
            digits[d] = 0;
        }
    }
    Ok(p_abc
        .iter()
        .map(|((ka, kb, kc), &p)| {
            let num = p * p_c[kc];
            let den = p_ac[&(ka.clone(), kc.clone())] * p_bc[&(kb.clone(), kc.clone())];
            p * (num / den).log2()
        })
        .sum())
}

/// Entropy of a marginal by direct summation.
fn summation_entropy<T: Real>(joint: &DmJoint<T>, set: &[Var]) -> Result<f64, DmError> {
    let idx: Vec<usize> = set
        .iter()
        .map(|v| {
            joint
                .variables()
                .iter()
                .position(|x| x == v)
                .ok_or(DmError::MissingVariable(*v))
        })
        .collect::<Result<_, _>>()?;
    let sizes = joint.sizes();
    let mut acc: BTreeMap<Key, f64> = BTreeMap::new();
    for (k, &p) in joint.probabilities().iter().enumerate() {
        let mut rest = k;
        let mut digits = vec![0usize; sizes.len()];
        for d in (0..sizes.len()).rev() {
            digits[d] = rest % sizes[d];
            rest /= sizes[d];
        }
        *acc.entry(idx.iter().map(|&i| digits[i]).collect())
            .or_default() += p.to_f64_lossy();
    }
    Ok(acc
        .values()
        .filter(|p| **p > 0.0)
        .map(|p| -p * p.log2())
        .sum())
}

/// Recomputes the value of `evaluator` on `joint`; `None` when a side
/// condition fails. Mirrors the evaluators' margins.
pub fn reference_value<T: Real>(
    evaluator: DmEvaluator,
    joint: &DmJoint<T>,
) -> Result<Option<f64>, DmError> {
    use Var::*;
    let i = |a: &[Var], b: &[Var], c: &[Var]| summation_mi(joint, a, b, c);
    let (s, sr, sd, u, u1, ur, ud, v) = (
        State,
        RelayStateDescription,
        DestStateDescription,
        AuxCommon,
        AuxDirect,
        AuxRelay,
        AuxDest,
        AuxOuter,
    );
    let (x2, y2, y3) = (RelayInput, RelayOutput, DestOutput);
    let slack = 1e-12;
    let margin = super::STRICT_MARGIN;
    Ok(match evaluator {
        DmEvaluator::LbStateDescription => {
            let relay = i(&[u], &[y2], &[v, sr])? - i(&[u], &[s, sd], &[v, sr])?;
            let dest = i(&[u, v], &[y3], &[sd])? - i(&[u, v], &[s, sr], &[sd])?;
            let r_rate = i(&[ur], &[y2, sr], &[u, v])? - i(&[ur], &[s, sr, sd], &[u, v])?;
            let shortfall = (i(&[u], &[y3, sd], &[v])? - i(&[u], &[s, sr, sd], &[v])?).min(0.0);
            let d_rate =
                i(&[ud], &[y3, sd], &[u, v])? - i(&[ud], &[s, sr, sd], &[u, v])? + shortfall;
            let cover = i(&[ur], &[ud], &[u, v, s, sr, sd])?;
            let ok_a = i(&[s], &[sr], &[])? <= r_rate + slack;
            let ok_b = i(&[s], &[sd], &[])? <= d_rate + slack;
            let ok_c =
                i(&[s], &[sr, sd], &[])? + i(&[sr], &[sd], &[])? <= r_rate + d_rate - cover + slack;
            let outer_constant = summation_entropy(joint, &[v])? <= slack;
            let ok_outer =
                outer_constant || i(&[v], &[y3, sd], &[])? - i(&[v], &[sr], &[])? > margin;
            (ok_a && ok_b && ok_c && ok_outer).then(|| relay.min(dest))
        }
        DmEvaluator::LbPartialDf => {
            let bin = i(&[u, u1], &[s], &[x2])?;
            let relay = i(&[u], &[y2], &[x2])? + i(&[u1], &[y3], &[u, x2])? - bin;
            let dest = i(&[u, u1, x2], &[y3], &[])? - bin;
            let ok = i(&[u], &[y2], &[x2])? - i(&[u], &[s], &[x2])? >= -slack
                && i(&[u1], &[y3], &[u, x2])? - i(&[u1], &[s], &[u, x2])? >= -slack
                && i(&[u, u1], &[y3], &[x2])? - bin >= -slack;
            ok.then(|| relay.min(dest))
        }
        DmEvaluator::LbInputDescription => {
            let rate = i(&[u], &[y3], &[])? - i(&[u], &[s], &[])?;
            let link = i(&[ur], &[y2], &[])? - i(&[ur], &[s], &[])? - i(&[ur], &[u], &[s])?;
            let desc = i(&[RelayCodeword], &[RelayCodewordEstimate], &[])?;
            (link - desc > margin).then_some(rate)
        }
        DmEvaluator::Ub => {
            let relay = i(&[v], &[y2, y3], &[u, x2])? - i(&[v], &[s], &[u, x2])?;
            let dest = i(&[v], &[y3], &[])? - i(&[v], &[s], &[])?;
            Some(relay.min(dest))
        }
        DmEvaluator::UbHyper => {
            let relay = i(&[SourceRelayInput], &[y2], &[x2, s])?;
            let hop = i(&[x2], &[y3], &[])?;
            let direct = i(&[SourceDestInput], &[y3], &[x2, s])?;
            Some(relay.min(hop) + direct)
        }
        DmEvaluator::CutSet => {
            let x1 = joint.source_vars();
            let mut x1x2 = x1.clone();
            x1x2.push(x2);
            Some(i(&x1, &[y2, y3], &[s, x2])?.min(i(&x1x2, &[y3], &[s])?))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dm::Template;

    #[test]
    fn bsc_mutual_information() {
        let p: f64 = 0.11;
        let pmf = vec![0.5 * (1.0 - p), 0.5 * p, 0.5 * p, 0.5 * (1.0 - p)];
        let vars = vec![Var::SourceInput, Var::RelayInput];
        let j = DmJoint::unchecked(vars, vec![2, 2], pmf, Template::CutSet).unwrap();
        let h2 = -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        let got = summation_mi(&j, &[Var::SourceInput], &[Var::RelayInput], &[]).unwrap();
        assert!((got - (1.0 - h2)).abs() < 1e-14);
        let h = summation_entropy(&j, &[Var::SourceInput]).unwrap();
        assert!((h - 1.0).abs() < 1e-14);
    }
}
