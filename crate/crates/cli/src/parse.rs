//! Text forms for harmonic functions, greedy regions, count grids and
//! built-in domains.
//!
//! Functions are `;`-separated terms, each an optional `weight*` prefix
//! followed by one of
//!
//! ```text
//! const:C        re:M@X,Y       im:M@X,Y       log@X,Y       expcos
//! ```
//!
//! so `0.5*re:2@10,10;const:1` is `0.5 Re(z - (10+10i))² + 1`.

use apollo_qmc_core::domain::{build_hex_lattice, build_square_lattice, build_three_tangent};
use apollo_qmc_core::fit::log_grid_counts;
use apollo_qmc_core::greedy::ConvexRegion;
use apollo_qmc_core::{DiskCoveredDomain, HarmonicFn, Vec2};

use crate::Error;

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn number<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, Error> {
    s.trim().parse().map_err(|_| usage(format!("{what}: cannot parse {s:?}")))
}

fn numbers(s: &str, what: &str) -> Result<Vec<f64>, Error> {
    s.split(',').map(|t| number(t, what)).collect()
}

fn point(s: &str, what: &str) -> Result<Vec2, Error> {
    match numbers(s, what)?.as_slice() {
        [x, y] => Ok(Vec2::new(*x, *y)),
        _ => Err(usage(format!("{what}: expected X,Y, got {s:?}"))),
    }
}

fn term(s: &str) -> Result<HarmonicFn, Error> {
    let s = s.trim();
    let (name, rest) = s.split_once([':', '@']).unwrap_or((s, ""));
    let at = |rest: &str| -> Result<(u32, Vec2), Error> {
        let (m, origin) = rest
            .split_once('@')
            .ok_or_else(|| usage(format!("function {s:?}: expected M@X,Y")))?;
        Ok((number(m, "degree")?, point(origin, "origin")?))
    };
    match name {
        "const" => Ok(HarmonicFn::Constant(number(rest, "constant")?)),
        "re" => at(rest).map(|(degree, origin)| HarmonicFn::PolyRe { degree, origin }),
        "im" => at(rest).map(|(degree, origin)| HarmonicFn::PolyIm { degree, origin }),
        "log" => Ok(HarmonicFn::LogPole { pole: point(rest, "pole")? }),
        "expcos" if rest.is_empty() => Ok(HarmonicFn::ExpCos),
        _ => Err(usage(format!("unknown function {s:?}"))),
    }
}

pub fn parse_function(s: &str) -> Result<HarmonicFn, Error> {
    let mut terms = Vec::new();
    for part in s.split(';') {
        let part = part.trim();
        match part.split_once('*') {
            Some((w, f)) => terms.push((number(w, "weight")?, term(f)?)),
            None => terms.push((1.0, term(part)?)),
        }
    }
    match terms.as_slice() {
        [] => Err(usage("empty function")),
        [(w, f)] if *w == 1.0 => Ok(f.clone()),
        _ => Ok(HarmonicFn::Combination(terms)),
    }
}

/// `square:S`, `disk:R` or `ellipse:A,B`.
pub fn parse_region(s: &str) -> Result<ConvexRegion, Error> {
    let (kind, args) = s.split_once(':').ok_or_else(|| usage(format!("region {s:?}: expected KIND:ARGS")))?;
    let v = numbers(args, "region")?;
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(usage(format!("region {s:?}: sizes must be positive")));
    }
    match (kind, v.as_slice()) {
        ("square", [side]) => Ok(ConvexRegion::Square { side: *side }),
        ("disk", [radius]) => Ok(ConvexRegion::Disk { radius: *radius }),
        ("ellipse", [a, b]) => Ok(ConvexRegion::Ellipse { a: *a, b: *b }),
        _ => Err(usage(format!("unknown region {s:?}"))),
    }
}

/// Either a comma list `10,100,1000` or `log:LO:HI:COUNT`.
pub fn parse_counts(s: &str) -> Result<Vec<usize>, Error> {
    let counts: Vec<usize> = if let Some(rest) = s.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, count] = parts.as_slice() else {
            return Err(usage(format!("grid {s:?}: expected log:LO:HI:COUNT")));
        };
        let (lo, hi) = (number::<usize>(lo, "grid")?, number::<usize>(hi, "grid")?);
        if lo == 0 || hi < lo {
            return Err(usage(format!("grid {s:?}: need 1 <= LO <= HI")));
        }
        log_grid_counts(lo, hi, number(count, "grid")?)
    } else {
        s.split(',').map(|t| number(t, "grid")).collect::<Result<_, _>>()?
    };
    if counts.is_empty() || counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage(format!("grid {s:?} must be non-empty and strictly increasing")));
    }
    Ok(counts)
}

pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, Error> {
    numbers(s, what)
}

/// `builtin:three-tangent:R1,R2,R3`, `builtin:square:M,N` or
/// `builtin:hex:ROWS,COLS`; `None` if `s` is not a built-in name.
pub fn builtin_domain(s: &str) -> Option<Result<DiskCoveredDomain, Error>> {
    let rest = s.strip_prefix("builtin:")?;
    let (kind, args) = rest.split_once(':').unwrap_or((rest, ""));
    let parsed = (|| {
        let v = numbers(args, "domain")?;
        let count = |x: f64| -> Result<usize, Error> {
            if x >= 1.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(usage(format!("domain {s:?}: lattice sizes must be positive integers")))
            }
        };
        match (kind, v.as_slice()) {
            ("three-tangent", [a, b, c]) => Ok(build_three_tangent(*a, *b, *c)?),
            ("square", [m, n]) => Ok(build_square_lattice(count(*m)?, count(*n)?)?),
            ("hex", [r, c]) => Ok(build_hex_lattice(count(*r)?, count(*c)?)?),
            _ => Err(usage(format!("unknown built-in domain {s:?}"))),
        }
    })();
    Some(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn functions() {
        assert_eq!(parse_function("const:2").unwrap(), HarmonicFn::Constant(2.0));
        assert_eq!(
            parse_function("re:2@10,10").unwrap(),
            HarmonicFn::PolyRe { degree: 2, origin: Vec2::new(10.0, 10.0) }
        );
        assert_eq!(parse_function("expcos").unwrap(), HarmonicFn::ExpCos);
        let combo = parse_function("0.5*log@-5,1e1; -2*im:3@0,0").unwrap();
        assert_eq!(
            combo,
            HarmonicFn::Combination(vec![
                (0.5, HarmonicFn::LogPole { pole: Vec2::new(-5.0, 10.0) }),
                (-2.0, HarmonicFn::PolyIm { degree: 3, origin: Vec2::new(0.0, 0.0) }),
            ])
        );
        for bad in ["", "re:2", "sin", "expcos:1", "log@1", "x*const:1"] {
            assert!(matches!(parse_function(bad), Err(Error::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn regions_and_grids() {
        assert_eq!(parse_region("ellipse:2,1").unwrap(), ConvexRegion::Ellipse { a: 2.0, b: 1.0 });
        assert!(parse_region("square:-1").is_err());
        assert!(parse_region("triangle:1").is_err());
        assert_eq!(parse_counts("10,100,1000").unwrap(), vec![10, 100, 1000]);
        assert_eq!(parse_counts("log:10:1000:3").unwrap(), vec![10, 100, 1000]);
        assert!(parse_counts("100,10").is_err());
        assert!(parse_counts("log:0:10:3").is_err());
    }

    #[test]
    fn builtins() {
        let d = builtin_domain("builtin:square:2,2").unwrap().unwrap();
        assert_eq!(d.base_disks().len(), 13);
        assert!(builtin_domain("builtin:square:2.5,2").unwrap().is_err());
        assert!(builtin_domain("domain.json").is_none());
    }
}
