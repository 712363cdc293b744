//! Parsers for the small argument languages: vertex pairs, lattice
//! directions, torus sizes and number lists.

use isoradial::isograph::VertexRef;

fn tuple(s: &str) -> Result<Vec<i64>, String> {
    let inner = s.trim().strip_prefix('(').and_then(|t| t.strip_suffix(')')).ok_or_else(|| format!("expected (..), got `{s}`"))?;
    inner.split(',').map(|t| t.trim().parse::<i64>().map_err(|e| format!("`{t}` in `{s}`: {e}"))).collect()
}

/// `(a,b)` is vertex 0 of cell `(a,b)`; `(i,a,b)` is vertex `i`.
pub fn vertex(s: &str) -> Result<VertexRef, String> {
    match tuple(s)?[..] {
        [a, b] => Ok(VertexRef::new(0, a, b)),
        [i, a, b] if i >= 0 => Ok(VertexRef::new(i as usize, a, b)),
        _ => Err(format!("vertex `{s}` must be (a,b) or (i,a,b) with i ≥ 0")),
    }
}

fn tokens(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| c.is_whitespace() || c == ';').filter(|t| !t.is_empty())
}

/// Whitespace- or `;`-separated list of `x:y` pairs.
pub fn pairs(s: &str) -> Result<Vec<(VertexRef, VertexRef)>, String> {
    let out: Vec<_> = tokens(s)
        .map(|t| {
            let (x, y) = t.split_once(':').ok_or_else(|| format!("pair `{t}` needs the form x:y"))?;
            Ok((vertex(x)?, vertex(y)?))
        })
        .collect::<Result<_, String>>()?;
    if out.is_empty() {
        return Err("no pairs given".into());
    }
    Ok(out)
}

/// Whitespace- or `;`-separated list of `(a,b)` lattice directions.
pub fn directions(s: &str) -> Result<Vec<[i64; 2]>, String> {
    tokens(s)
        .map(|t| match tuple(t)?[..] {
            [0, 0] => Err("direction (0,0) has no length".to_string()),
            [a, b] => Ok([a, b]),
            _ => Err(format!("direction `{t}` must be (a,b)")),
        })
        .collect()
}

/// `NxM`.
pub fn torus(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("torus `{s}` must look like 8x8"))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("torus `{s}`: {e}"));
    Ok((p(a)?, p(b)?))
}

/// Comma-separated numbers; `pi` and `pi/n` are accepted for angles.
pub fn numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let v = match t.strip_prefix("pi") {
                Some("") => std::f64::consts::PI,
                Some(rest) => {
                    let d: f64 = rest.strip_prefix('/').and_then(|d| d.parse().ok()).ok_or_else(|| format!("bad angle `{t}`"))?;
                    std::f64::consts::PI / d
                }
                None => t.parse().map_err(|e| format!("`{t}`: {e}"))?,
            };
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("`{t}` is not finite"))
            }
        })
        .collect()
}
