//! Plain-text system format.
//!
//! ```text
//! POLYSYS n=6 m=2
//! (1,0)*x1*x5 + (-1,0)*x4*x2
//! (1,0)*x2*x6 + (-1,0)*x5*x3
//! ```
//!
//! Whitespace anywhere is ignored. Coefficients are written with 17
//! significant digits so a write/read cycle is exact.

use num_complex::Complex64;

use super::{Monomial, PolySystem, Polynomial};
use crate::error::{Error, Result};

pub(crate) fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_term(out: &mut String, t: &Monomial) {
    out.push('(');
    out.push_str(&format_float(t.coefficient.re));
    out.push(',');
    out.push_str(&format_float(t.coefficient.im));
    out.push(')');
    for (j, &e) in t.exponents.iter().enumerate() {
        match e {
            0 => {}
            1 => out.push_str(&format!("*x{}", j + 1)),
            _ => out.push_str(&format!("*x{}^{}", j + 1, e)),
        }
    }
}

pub(crate) fn write_polynomial(out: &mut String, p: &Polynomial) {
    if p.terms().is_empty() {
        out.push_str("(0,0)");
        return;
    }
    for (i, t) in p.terms().iter().enumerate() {
        if i > 0 {
            out.push_str(" + ");
        }
        write_term(out, t);
    }
}

pub(crate) fn write_system(f: &PolySystem) -> String {
    let mut out = format!("POLYSYS n={} m={}\n", f.n(), f.m());
    for p in f.equations() {
        write_polynomial(&mut out, p);
        out.push('\n');
    }
    out
}

fn strip_ws(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn parse_header(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let compact = strip_ws(line);
    let rest = compact
        .strip_prefix("POLYSYS")
        .ok_or_else(|| Error::parse(lineno, "expected header `POLYSYS n=<n> m=<m>`"))?;
    let rest = rest
        .strip_prefix("n=")
        .ok_or_else(|| Error::parse(lineno, "header is missing `n=`"))?;
    let (n_str, m_str) = rest
        .split_once("m=")
        .ok_or_else(|| Error::parse(lineno, "header is missing `m=`"))?;
    let n = n_str
        .parse()
        .map_err(|_| Error::parse(lineno, format!("bad variable count `{n_str}`")))?;
    let m = m_str
        .parse()
        .map_err(|_| Error::parse(lineno, format!("bad equation count `{m_str}`")))?;
    Ok((n, m))
}

/// Splits on `+` that sit outside parentheses.
fn split_terms(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_term(s: &str, n: usize, lineno: usize) -> Result<(Complex64, Vec<u32>)> {
    let body = s
        .strip_prefix('(')
        .ok_or_else(|| Error::parse(lineno, format!("term `{s}` must start with `(re,im)`")))?;
    let close = body
        .find(')')
        .ok_or_else(|| Error::parse(lineno, format!("unclosed coefficient in `{s}`")))?;
    let (re_s, im_s) = body[..close]
        .split_once(',')
        .ok_or_else(|| Error::parse(lineno, format!("coefficient `{}` needs `re,im`", &body[..close])))?;
    let re: f64 = re_s
        .parse()
        .map_err(|_| Error::parse(lineno, format!("bad real part `{re_s}`")))?;
    let im: f64 = im_s
        .parse()
        .map_err(|_| Error::parse(lineno, format!("bad imaginary part `{im_s}`")))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(Error::parse(lineno, "coefficient is not finite"));
    }
    let mut exps = vec![0u32; n];
    let rest = &body[close + 1..];
    if !rest.is_empty() {
        let factors = rest
            .strip_prefix('*')
            .ok_or_else(|| Error::parse(lineno, format!("expected `*` after coefficient in `{s}`")))?;
        for factor in factors.split('*') {
            let var = factor
                .strip_prefix('x')
                .ok_or_else(|| Error::parse(lineno, format!("bad factor `{factor}`")))?;
            let (idx_s, exp_s) = match var.split_once('^') {
                Some((i, e)) => (i, e),
                None => (var, "1"),
            };
            let idx: usize = idx_s
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad variable index in `{factor}`")))?;
            if idx == 0 || idx > n {
                return Err(Error::parse(
                    lineno,
                    format!("variable x{idx} outside x1..x{n}"),
                ));
            }
            let e: u32 = exp_s
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad exponent in `{factor}`")))?;
            exps[idx - 1] += e;
        }
    }
    Ok((Complex64::new(re, im), exps))
}

pub(crate) fn parse_polynomial(line: &str, n: usize, lineno: usize) -> Result<Polynomial> {
    let compact = strip_ws(line);
    if compact.is_empty() {
        return Err(Error::parse(lineno, "empty equation line"));
    }
    let terms = split_terms(&compact)
        .into_iter()
        .map(|t| parse_term(t, n, lineno))
        .collect::<Result<Vec<_>>>()?;
    Polynomial::from_terms(n, terms).map_err(|e| Error::parse(lineno, e.to_string()))
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

pub(crate) fn parse_lines<'a, I>(lines: I, first_line: usize) -> Result<(PolySystem, usize)>
where
    I: Iterator<Item = &'a str>,
{
    let mut lines = lines.enumerate().map(|(i, l)| (first_line + i, l));
    let mut consumed = 0;
    let (header_no, header) = loop {
        match lines.next() {
            Some((no, l)) => {
                consumed += 1;
                if !is_skippable(l) {
                    break (no, l);
                }
            }
            None => return Err(Error::parse(first_line, "missing POLYSYS header")),
        }
    };
    let (n, m) = parse_header(header, header_no)?;
    let mut equations = Vec::with_capacity(m);
    let mut last_no = header_no;
    while equations.len() < m {
        match lines.next() {
            Some((no, l)) => {
                consumed += 1;
                last_no = no;
                if is_skippable(l) {
                    continue;
                }
                equations.push(parse_polynomial(l, n, no)?);
            }
            None => {
                return Err(Error::parse(
                    last_no + 1,
                    format!("expected {m} equations, found {}", equations.len()),
                ))
            }
        }
    }
    Ok((PolySystem::new(n, equations)?, consumed))
}

pub(crate) fn parse_system(s: &str) -> Result<PolySystem> {
    let mut lines = s.lines();
    let (f, _) = parse_lines(&mut lines, 1)?;
    for (i, rest) in lines.enumerate() {
        if !is_skippable(rest) {
            return Err(Error::parse(
                f.m() + 2 + i,
                "unexpected content after the last equation",
            ));
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polysys::{adjacent_minors, cyclic_roots, random_sparse_hypersurface};

    #[test]
    fn writes_minors() {
        let text = adjacent_minors(2).unwrap().to_text();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("POLYSYS n=4 m=1"));
        let eq = lines.next().unwrap();
        assert!(eq.contains("*x1*x4"), "{eq}");
        assert!(eq.contains("*x2*x3"), "{eq}");
    }

    #[test]
    fn round_trips_exactly() {
        for f in [
            adjacent_minors(4).unwrap(),
            cyclic_roots(5).unwrap(),
            random_sparse_hypersurface(6, 7, 4, 3).unwrap(),
        ] {
            assert_eq!(PolySystem::from_text(&f.to_text()).unwrap(), f);
        }
    }

    #[test]
    fn accepts_arbitrary_whitespace() {
        let text = "  POLYSYS  n = 2   m=1 \n ( 1 , 0 ) * x1 ^ 2 +\t(-2.5,1e-1)*x2 + (3,0)\n";
        let f = PolySystem::from_text(text).unwrap();
        let p = &f.equations()[0];
        assert_eq!(p.coefficient_of(&[2, 0]), Complex64::new(1.0, 0.0));
        assert_eq!(p.coefficient_of(&[0, 1]), Complex64::new(-2.5, 0.1));
        assert_eq!(p.coefficient_of(&[0, 0]), Complex64::new(3.0, 0.0));
    }

    #[test]
    fn exponent_signs_inside_coefficients() {
        let f = PolySystem::from_text("POLYSYS n=1 m=1\n(1e+2,-3e-2)*x1 + (1,0)\n").unwrap();
        assert_eq!(f.equations()[0].terms().len(), 2);
    }

    #[test]
    fn reports_line_numbers() {
        let err = PolySystem::from_text("POLYSYS n=2 m=2\n(1,0)*x1\n(1,0)*x3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = PolySystem::from_text("POLYSYS n=2 m=2\n(1,0)*x1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = PolySystem::from_text("POLY n=2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        assert!(PolySystem::from_text("POLYSYS n=1 m=1\n(1,0)x1\n").is_err());
    }

    #[test]
    fn zero_polynomial_round_trips() {
        let f = PolySystem::new(2, vec![Polynomial::zero(2)]).unwrap();
        assert_eq!(PolySystem::from_text(&f.to_text()).unwrap(), f);
    }
}
