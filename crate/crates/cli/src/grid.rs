//! Parameter grids: `1..3`, `0,0.5,1`, `3/2,2`, and norm lists like `lq:2,lq:4`.

use sharpineq_core::{parse_real, Error, NormSpec, Result, WeightedDomain};

/// Integers from a comma list whose items are either `k` or `lo..hi` (inclusive).
pub fn parse_usizes(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("not an integer list: `{s}`"));
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        match item.split_once("..") {
            Some((lo, hi)) => {
                let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                out.extend(lo..=hi);
            }
            None => out.push(item.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

/// Reals from a comma list; items may be ratios `p/q`.
pub fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_real).collect()
}

/// Norm templates from a list like `lq:2,lq:4`; the dimension is filled in
/// per grid point.
pub fn parse_norms(s: &str) -> Result<Vec<String>> {
    let items: Vec<String> = s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect();
    for t in &items {
        NormSpec::parse_with_dim(t, Some(1))?;
    }
    if items.is_empty() {
        return Err(Error::Parse("empty norm list".into()));
    }
    Ok(items)
}

/// One point of an `(n, a, p, norm)` grid on the half space `ℝ^{n−1} × ℝ₊`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub n: usize,
    pub a: f64,
    pub p: f64,
    pub norm: String,
}

impl GridPoint {
    pub fn domain(&self) -> Result<WeightedDomain> {
        WeightedDomain::half_space(self.n, self.a, NormSpec::parse_with_dim(&self.norm, Some(self.n))?)
    }
}

/// Cartesian product in canonical order (norm, n, a, p), duplicates removed.
pub fn product(ns: &[usize], as_: &[f64], ps: &[f64], norms: &[String]) -> Vec<GridPoint> {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (as_, ps) = (sorted(as_), sorted(ps));
    let mut out = Vec::new();
    for norm in norms {
        for &n in &ns {
            for &a in &as_ {
                for &p in &ps {
                    out.push(GridPoint { n, a, p, norm: norm.clone() });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_usizes("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_usizes("1, 4..5").unwrap(), vec![1, 4, 5]);
        assert!(parse_usizes("3..1").is_err());
        assert_eq!(parse_reals("3/2,2").unwrap(), vec![1.5, 2.0]);
        assert!(parse_reals("1,x").is_err());
        assert_eq!(parse_norms("lq:2,lq:4").unwrap().len(), 2);
        assert!(parse_norms("l2").is_err());
    }

    #[test]
    fn canonical_product() {
        let g = product(&[2, 1, 2], &[1.0, 0.0], &[2.0], &["lq:2".into()]);
        let keys: Vec<(usize, f64)> = g.iter().map(|p| (p.n, p.a)).collect();
        assert_eq!(keys, vec![(1, 0.0), (1, 1.0), (2, 0.0), (2, 1.0)]);
        assert_eq!(g[3].domain().unwrap().n_a(), 3.0);
    }
}
