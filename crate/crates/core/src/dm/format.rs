//! Plain-text channel and joint files.
//!
//! Both kinds start with a header block and then list probabilities, one per
//! line, after an index tuple. `#` starts a comment; blank lines are skipped;
//! unlisted entries are zero.
//!
//! ```text
//! channel
//! size S 1
//! size X1 2          # or: size X1R 2 / size X1D 2
//! size X2 2
//! size Y2 2
//! size Y3 2
//! end
//! state 0 1
//! kernel 0 0 0 0 0 0.9   # s x1 x2 y2 y3 p (split source: s x1r x1d x2 y2 y3 p)
//! ```
//!
//! ```text
//! joint hyper_upper
//! size S 1               # declaration order fixes the index order below
//! size X2 2
//! ...
//! end
//! 0 0 0 0 0 0 0.0625
//! ```

use std::fmt::Write as _;

use crate::scalar::Real;

use super::{ChannelSizes, DmChannel, DmError, DmJoint, SourceAlphabet, Template, Var};

fn parse_err(line: usize, message: impl Into<String>) -> DmError {
    DmError::Parse {
        line,
        message: message.into(),
    }
}

/// Non-empty, comment-stripped lines with their 1-based numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = body.split_whitespace().collect();
        (!words.is_empty()).then_some((i + 1, words))
    })
}

struct Header {
    kind: Vec<String>,
    sizes: Vec<(Var, usize)>,
}

fn read_header<'a>(
    it: &mut impl Iterator<Item = (usize, Vec<&'a str>)>,
) -> Result<Header, DmError> {
    let (_, first) = it.next().ok_or_else(|| parse_err(0, "empty input"))?;
    let kind = first.iter().map(|s| s.to_string()).collect();
    let mut sizes = Vec::new();
    for (n, words) in it.by_ref() {
        match words.as_slice() {
            ["end"] => return Ok(Header { kind, sizes }),
            ["size", name, value] => {
                let var: Var = name
                    .parse()
                    .map_err(|e: DmError| parse_err(n, e.to_string()))?;
                let size: usize = value
                    .parse()
                    .map_err(|_| parse_err(n, format!("bad size `{value}`")))?;
                if sizes.iter().any(|(v, _)| *v == var) {
                    return Err(parse_err(n, format!("{var} declared twice")));
                }
                sizes.push((var, size));
            }
            _ => return Err(parse_err(n, "expected `size <var> <n>` or `end`")),
        }
    }
    Err(parse_err(0, "missing `end` after header"))
}

fn parse_index(n: usize, word: &str, bound: usize) -> Result<usize, DmError> {
    let i: usize = word
        .parse()
        .map_err(|_| parse_err(n, format!("bad index `{word}`")))?;
    if i < bound {
        Ok(i)
    } else {
        Err(parse_err(n, format!("index {i} out of range 0..{bound}")))
    }
}

fn parse_prob<T: Real>(n: usize, word: &str) -> Result<T, DmError> {
    let x: f64 = word
        .parse()
        .map_err(|_| parse_err(n, format!("bad probability `{word}`")))?;
    T::from_f64(x).ok_or_else(|| parse_err(n, format!("bad probability `{word}`")))
}

/// Parses a channel file.
pub fn parse_channel<T: Real>(text: &str) -> Result<DmChannel<T>, DmError> {
    let mut it = lines(text);
    let header = read_header(&mut it)?;
    if header.kind != ["channel"] {
        return Err(parse_err(1, "expected `channel`"));
    }
    let get = |v: Var| header.sizes.iter().find(|(x, _)| *x == v).map(|(_, n)| *n);
    let need = |v: Var| get(v).ok_or_else(|| parse_err(0, format!("missing size of {v}")));
    let source = match (
        get(Var::SourceInput),
        get(Var::SourceRelayInput),
        get(Var::SourceDestInput),
    ) {
        (Some(n), None, None) => SourceAlphabet::Single(n),
        (None, Some(relay), Some(dest)) => SourceAlphabet::Split { relay, dest },
        _ => return Err(parse_err(0, "declare either X1 or both X1R and X1D")),
    };
    let sizes = ChannelSizes {
        state: need(Var::State)?,
        source,
        relay_input: need(Var::RelayInput)?,
        relay_output: need(Var::RelayOutput)?,
        dest_output: need(Var::DestOutput)?,
    };
    let mut state = vec![T::zero(); sizes.state];
    let mut kernel = vec![T::zero(); sizes.kernel_len()];
    let mut dims: Vec<usize> = vec![sizes.state];
    dims.extend(source.variables().iter().map(|(_, n)| *n));
    dims.extend([sizes.relay_input, sizes.relay_output, sizes.dest_output]);
    for (n, words) in it {
        match words.as_slice() {
            ["state", s, p] => state[parse_index(n, s, sizes.state)?] = parse_prob(n, p)?,
            ["kernel", rest @ ..] if rest.len() == dims.len() + 1 => {
                let flat = rest[..dims.len()]
                    .iter()
                    .zip(&dims)
                    .try_fold(0usize, |acc, (w, &d)| {
                        Ok::<_, DmError>(acc * d + parse_index(n, w, d)?)
                    })?;
                kernel[flat] = parse_prob(n, rest[dims.len()])?;
            }
            _ => {
                return Err(parse_err(
                    n,
                    format!(
                        "expected `state s p` or `kernel` with {} indices",
                        dims.len()
                    ),
                ))
            }
        }
    }
    DmChannel::new(sizes, state, kernel)
}

/// Parses a joint file; the result is validated against its template.
pub fn parse_joint<T: Real>(text: &str) -> Result<DmJoint<T>, DmError> {
    let mut it = lines(text);
    let header = read_header(&mut it)?;
    let template: Template = match header.kind.as_slice() {
        [kw, t] if kw == "joint" => t
            .parse()
            .map_err(|e: DmError| parse_err(1, e.to_string()))?,
        _ => return Err(parse_err(1, "expected `joint <template>`")),
    };
    let (vars, dims): (Vec<Var>, Vec<usize>) = header.sizes.into_iter().unzip();
    let mut pmf = vec![T::zero(); dims.iter().product()];
    for (n, words) in it {
        if words.len() != dims.len() + 1 {
            return Err(parse_err(
                n,
                format!("expected {} indices and a probability", dims.len()),
            ));
        }
        let flat = words[..dims.len()]
            .iter()
            .zip(&dims)
            .try_fold(0usize, |acc, (w, &d)| {
                Ok::<_, DmError>(acc * d + parse_index(n, w, d)?)
            })?;
        pmf[flat] = parse_prob(n, words[dims.len()])?;
    }
    DmJoint::new(vars, dims, pmf, template)
}

fn digits(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = flat % d;
        flat /= d;
    }
    out
}

fn tuple(idx: &[usize]) -> String {
    idx.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Writes a channel file, listing nonzero kernel entries only.
pub fn channel_to_text<T: Real>(channel: &DmChannel<T>) -> String {
    let z = channel.sizes();
    let mut out = String::from("channel\n");
    let mut dims = vec![z.state];
    let _ = writeln!(out, "size S {}", z.state);
    for (v, n) in z.source.variables() {
        let _ = writeln!(out, "size {v} {n}");
        dims.push(n);
    }
    let _ = writeln!(
        out,
        "size X2 {}\nsize Y2 {}\nsize Y3 {}\nend",
        z.relay_input, z.relay_output, z.dest_output
    );
    dims.extend([z.relay_input, z.relay_output, z.dest_output]);
    for (s, p) in channel.state_pmf().iter().enumerate() {
        let _ = writeln!(out, "state {s} {p}");
    }
    for (k, p) in channel.kernel_table().iter().enumerate() {
        if *p != T::zero() {
            let _ = writeln!(out, "kernel {} {p}", tuple(&digits(k, &dims)));
        }
    }
    out
}

/// Writes a joint file, listing nonzero entries only.
pub fn joint_to_text<T: Real>(joint: &DmJoint<T>) -> String {
    let mut out = format!("joint {}\n", joint.template());
    for (v, n) in joint.variables().iter().zip(joint.sizes()) {
        let _ = writeln!(out, "size {v} {n}");
    }
    out.push_str("end\n");
    for (k, p) in joint.probabilities().iter().enumerate() {
        if *p != T::zero() {
            let _ = writeln!(out, "{} {p}", tuple(&digits(k, joint.sizes())));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const BSC: &str = "\
# binary relay with noiseless links
channel
size S 1
size X1R 2
size X1D 1
size X2 2
size Y2 2
size Y3 2
end
state 0 1
kernel 0 0 0 0 0 0 1
kernel 0 0 0 1 0 1 1
kernel 0 1 0 0 1 0 1
kernel 0 1 0 1 1 1 1
";

    #[test]
    fn channel_round_trip() {
        let ch: DmChannel<f64> = parse_channel(BSC).unwrap();
        assert_eq!(ch.kernel(0, 1, 1, 1, 1), 1.0);
        assert_eq!(ch.kernel(0, 1, 1, 0, 1), 0.0);
        let again: DmChannel<f64> = parse_channel(&channel_to_text(&ch)).unwrap();
        assert_eq!(ch, again);
    }

    #[test]
    fn reports_line_numbers() {
        let bad = BSC.replace("kernel 0 1 0 1 1 1 1", "kernel 0 1 0 1 1 1 x");
        match parse_channel::<f64>(&bad) {
            Err(DmError::Parse { line, .. }) => assert_eq!(line, 14),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn joint_round_trip() {
        let text = "joint cutset\nsize S 1\nsize X1 2\nsize X2 1\nsize Y2 2\nsize Y3 1\nend\n\
                    0 0 0 0 0 0.5\n0 1 0 1 0 0.5\n";
        let j: DmJoint<f64> = parse_joint(text).unwrap();
        assert_eq!(j.template(), Template::CutSet);
        let again: DmJoint<f64> = parse_joint(&joint_to_text(&j)).unwrap();
        assert_eq!(j, again);
    }
}
