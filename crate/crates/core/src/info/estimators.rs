use serde::{Deserialize, Serialize};

use super::discretize::{discretize, Binned, DiscretizationSpec};
use super::histogram::JointHistogram;
use crate::error::{check_len, Error, Result};

/// An information statistic in nats together with how it was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoValue {
    pub value: f64,
    pub spec: Option<DiscretizationSpec>,
    pub samples: usize,
}

impl InfoValue {
    fn new(value: f64, spec: Option<DiscretizationSpec>, samples: usize) -> Self {
        Self {
            value,
            spec,
            samples,
        }
    }
}

/// Plug-in entropy of a histogram.
pub fn entropy(hist: &JointHistogram) -> Result<InfoValue> {
    if hist.total() == 0 {
        return Err(Error::EmptyHistogram);
    }
    Ok(InfoValue::new(
        hist.entropy_nats(),
        None,
        hist.total() as usize,
    ))
}

/// Plug-in entropy of a binned series.
pub fn entropy_of(series: &[f64], spec: &DiscretizationSpec) -> Result<InfoValue> {
    let b = discretize(series, spec)?;
    let hist = histogram(&[&b])?;
    Ok(InfoValue::new(
        hist.entropy_nats(),
        Some(*spec),
        series.len(),
    ))
}

pub(crate) fn histogram(vars: &[&Binned]) -> Result<JointHistogram> {
    let cols: Vec<&[usize]> = vars.iter().map(|b| b.indices.as_slice()).collect();
    let shape: Vec<usize> = vars.iter().map(|b| b.n_bins()).collect();
    let mut h = JointHistogram::from_indices(&cols, &shape)?;
    h.edges = vars.iter().map(|b| b.edges.clone()).collect();
    Ok(h)
}

/// I(x;y) = H(x) + H(y) - H(x,y) on a 2-d histogram.
pub fn mi_from_histogram(hist: &JointHistogram) -> Result<f64> {
    if hist.dims() != 2 {
        return Err(Error::invalid("mutual information needs a 2-d histogram"));
    }
    let hx = hist.marginal(&[0])?.entropy_nats();
    let hy = hist.marginal(&[1])?.entropy_nats();
    Ok((hx + hy - hist.entropy_nats()).max(0.0))
}

/// I(x;y|z) = H(x,z) + H(y,z) - H(x,y,z) - H(z) on a 3-d histogram ordered
/// (x, y, z).
pub fn cmi_from_histogram(hist: &JointHistogram) -> Result<f64> {
    if hist.dims() != 3 {
        return Err(Error::invalid(
            "conditional mutual information needs a 3-d histogram",
        ));
    }
    let hxz = hist.marginal(&[0, 2])?.entropy_nats();
    let hyz = hist.marginal(&[1, 2])?.entropy_nats();
    let hz = hist.marginal(&[2])?.entropy_nats();
    Ok((hxz + hyz - hist.entropy_nats() - hz).max(0.0))
}

pub(crate) fn mi_binned(x: &Binned, y: &Binned) -> Result<f64> {
    mi_from_histogram(&histogram(&[x, y])?)
}

fn warn_sparse(n: usize, cells: usize, what: &str) {
    if n < cells {
        log::warn!("{what}: {n} samples for {cells} joint cells; estimate is biased upward");
    }
}

/// Plug-in mutual information between two equally long series, each binned
/// independently under `spec`.
pub fn mutual_information(x: &[f64], y: &[f64], spec: &DiscretizationSpec) -> Result<InfoValue> {
    check_len("mutual information inputs", x.len(), y.len())?;
    warn_sparse(x.len(), spec.bins * spec.bins, "mutual information");
    let bx = discretize(x, spec)?;
    let by = discretize(y, spec)?;
    Ok(InfoValue::new(mi_binned(&bx, &by)?, Some(*spec), x.len()))
}

/// Plug-in I(x;y|z).
pub fn conditional_mi(
    x: &[f64],
    y: &[f64],
    z: &[f64],
    spec: &DiscretizationSpec,
) -> Result<InfoValue> {
    check_len("conditional MI x/y", x.len(), y.len())?;
    check_len("conditional MI x/z", x.len(), z.len())?;
    let bx = discretize(x, spec)?;
    let by = discretize(y, spec)?;
    let bz = discretize(z, spec)?;
    let h = histogram(&[&bx, &by, &bz])?;
    Ok(InfoValue::new(
        cmi_from_histogram(&h)?,
        Some(*spec),
        x.len(),
    ))
}

/// Bin indices of (target[t+lag], source[t], target[t]) for one aligned pair
/// of series.
fn te_triples(source: &[usize], target: &[usize], lag: usize, out: &mut [Vec<usize>; 3]) {
    let n = target.len() - lag;
    out[0].extend_from_slice(&target[lag..]);
    out[1].extend_from_slice(&source[..n]);
    out[2].extend_from_slice(&target[..n]);
}

fn check_lag(len: usize, lag: usize) -> Result<()> {
    if lag == 0 {
        return Err(Error::invalid("transfer entropy lag must be at least 1"));
    }
    if len <= lag {
        return Err(Error::invalid(format!(
            "series of length {len} too short for lag {lag}"
        )));
    }
    Ok(())
}

pub(crate) fn te_binned(source: &Binned, target: &Binned, lag: usize) -> Result<f64> {
    check_lag(target.len(), lag)?;
    let mut cols = [Vec::new(), Vec::new(), Vec::new()];
    te_triples(&source.indices, &target.indices, lag, &mut cols);
    let shape = [target.n_bins(), source.n_bins(), target.n_bins()];
    let h = JointHistogram::from_indices(&[&cols[0], &cols[1], &cols[2]], &shape)?;
    cmi_from_histogram(&h)
}

/// Transfer entropy I(target[t+lag]; source[t] | target[t]).
///
/// Both series are binned over their full length, then aligned.
pub fn transfer_entropy(
    source: &[f64],
    target: &[f64],
    lag: usize,
    spec: &DiscretizationSpec,
) -> Result<InfoValue> {
    check_len("transfer entropy inputs", source.len(), target.len())?;
    check_lag(target.len(), lag)?;
    let bs = discretize(source, spec)?;
    let bt = discretize(target, spec)?;
    Ok(InfoValue::new(
        te_binned(&bs, &bt, lag)?,
        Some(*spec),
        target.len() - lag,
    ))
}

/// Transfer entropy pooled over several realisations (e.g. ensemble
/// members). Each variable is binned once over all realisations, then
/// lagged triples are formed within each realisation only.
pub fn transfer_entropy_pooled(
    sources: &[&[f64]],
    targets: &[&[f64]],
    lag: usize,
    spec: &DiscretizationSpec,
) -> Result<InfoValue> {
    check_len("pooled realisations", sources.len(), targets.len())?;
    if sources.is_empty() {
        return Err(Error::invalid("no realisations to pool"));
    }
    for (s, t) in sources.iter().zip(targets) {
        check_len("pooled transfer entropy inputs", s.len(), t.len())?;
        check_lag(t.len(), lag)?;
    }
    let flat_s: Vec<f64> = sources.iter().flat_map(|s| s.iter().copied()).collect();
    let flat_t: Vec<f64> = targets.iter().flat_map(|t| t.iter().copied()).collect();
    let bs = discretize(&flat_s, spec)?;
    let bt = discretize(&flat_t, spec)?;

    let mut cols = [Vec::new(), Vec::new(), Vec::new()];
    let mut offset = 0;
    for t in targets {
        let range = offset..offset + t.len();
        te_triples(
            &bs.indices[range.clone()],
            &bt.indices[range],
            lag,
            &mut cols,
        );
        offset += t.len();
    }
    let shape = [bt.n_bins(), bs.n_bins(), bt.n_bins()];
    let h = JointHistogram::from_indices(&[&cols[0], &cols[1], &cols[2]], &shape)?;
    let samples = cols[0].len();
    Ok(InfoValue::new(
        cmi_from_histogram(&h)?,
        Some(*spec),
        samples,
    ))
}

/// Shannon's transform in the orientation that makes [`f_statistic`] equal
/// to mutual information: `u ln u`, with `0 ln 0 = 0`.
pub fn shannon_transform(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u.ln()
    }
}

/// E[f(p(x|y) / p(x))] taken under the product of the marginals, i.e.
/// `sum p(x) p(y) f(p(x,y) / (p(x) p(y)))` over cells with occupied
/// marginals. With [`shannon_transform`] this is the mutual information.
pub fn f_statistic_from_histogram(hist: &JointHistogram, f: impl Fn(f64) -> f64) -> Result<f64> {
    if hist.dims() != 2 {
        return Err(Error::invalid("f-statistic needs a 2-d histogram"));
    }
    if hist.total() == 0 {
        return Err(Error::EmptyHistogram);
    }
    let n = hist.total() as f64;
    let px = hist.marginal(&[0])?;
    let py = hist.marginal(&[1])?;
    let ny = hist.shape()[1];
    let mut acc = 0.0;
    for (i, &cx) in px.counts().iter().enumerate() {
        if cx == 0 {
            continue;
        }
        for (j, &cy) in py.counts().iter().enumerate() {
            if cy == 0 {
                continue;
            }
            let cxy = hist.counts()[i * ny + j] as f64;
            let prod = (cx as f64) * (cy as f64);
            let ratio = cxy * n / prod;
            let v = f(ratio);
            if !v.is_finite() {
                return Err(Error::NonFiniteTransform { ratio });
            }
            acc += prod / (n * n) * v;
        }
    }
    Ok(acc)
}

/// Generalised information statistic with transform `f` (convex on
/// (0, inf) for a self-equitable measure).
pub fn f_statistic(
    x: &[f64],
    y: &[f64],
    f: impl Fn(f64) -> f64,
    spec: &DiscretizationSpec,
) -> Result<InfoValue> {
    check_len("f-statistic inputs", x.len(), y.len())?;
    let bx = discretize(x, spec)?;
    let by = discretize(y, spec)?;
    let h = histogram(&[&bx, &by])?;
    Ok(InfoValue::new(
        f_statistic_from_histogram(&h, f)?,
        Some(*spec),
        x.len(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec2() -> DiscretizationSpec {
        DiscretizationSpec::fixed_width(2)
    }

    #[test]
    fn mi_of_duplicated_pairs_is_ln2() {
        let x = [0.0, 0.0, 1.0, 1.0];
        let mi = mutual_information(&x, &x, &spec2()).unwrap();
        assert!((mi.value - 2f64.ln()).abs() < 1e-12);
        assert_eq!(mi.samples, 4);
    }

    #[test]
    fn cmi_with_constant_condition_is_mi() {
        let x = [0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        let y = [0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        let z = [5.0; 8];
        let mi = mutual_information(&x, &y, &spec2()).unwrap().value;
        let cmi = conditional_mi(&x, &y, &z, &spec2()).unwrap().value;
        assert!((mi - cmi).abs() < 1e-12);
    }

    #[test]
    fn xor_cmi_is_ln2() {
        // all eight (x, z) combinations twice; y = x xor z
        let mut x = vec![];
        let mut y = vec![];
        let mut z = vec![];
        for _ in 0..2 {
            for a in 0..2 {
                for c in 0..2 {
                    x.push(a as f64);
                    z.push(c as f64);
                    y.push((a ^ c) as f64);
                }
            }
        }
        let cmi = conditional_mi(&x, &y, &z, &spec2()).unwrap().value;
        assert!((cmi - 2f64.ln()).abs() < 1e-12);
        // marginally independent
        assert!(mutual_information(&x, &y, &spec2()).unwrap().value < 1e-12);
    }

    #[test]
    fn self_transfer_entropy_is_zero() {
        let y: Vec<f64> = (0..40).map(|i| ((i * 7) % 5) as f64).collect();
        let te = transfer_entropy(&y, &y, 1, &spec2()).unwrap();
        assert!(te.value.abs() < 1e-12);
    }

    #[test]
    fn lag_errors() {
        let y = [1.0, 2.0, 3.0];
        assert!(transfer_entropy(&y, &y, 3, &spec2()).is_err());
        assert!(transfer_entropy(&y, &y, 0, &spec2()).is_err());
        assert!(transfer_entropy(&y, &y[..2], 1, &spec2()).is_err());
    }

    #[test]
    fn shannon_f_statistic_is_mi() {
        let x: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 0.3).sin() + v / 50.0).collect();
        let spec = DiscretizationSpec::quantile(6);
        let mi = mutual_information(&x, &y, &spec).unwrap().value;
        let f = f_statistic(&x, &y, shannon_transform, &spec).unwrap().value;
        assert!((mi - f).abs() < 1e-12);
    }

    #[test]
    fn identity_f_statistic_integrates_to_one() {
        let x = [0.0, 1.0, 0.0, 1.0];
        let y = [0.0, 0.0, 1.0, 1.0];
        let v = f_statistic(&x, &y, |u| u, &spec2()).unwrap().value;
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn self_paired_f_statistic_by_hand() {
        // p = (1/4, 3/4) on the diagonal
        let x = [0.0, 1.0, 1.0, 1.0];
        let f = |u: f64| (u - 1.0).powi(2);
        let v = f_statistic(&x, &x, f, &spec2()).unwrap().value;
        let (a, b) = (0.25f64, 0.75f64);
        let expected = a * a * f(1.0 / a) + b * b * f(1.0 / b) + 2.0 * a * b * f(0.0);
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn non_finite_transform_is_reported() {
        let x = [0.0, 1.0, 0.0, 1.0];
        let y = [0.0, 1.0, 1.0, 1.0];
        let err = f_statistic(&x, &y, |u: f64| u.ln(), &spec2()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteTransform { .. }));
    }
}
