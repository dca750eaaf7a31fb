//! TSPLIB95 reader for symmetric TSP entries, and an EXPLICIT/UPPER_ROW writer.
//!
//! Distance functions follow the TSPLIB95 reference definitions, including
//! their integer truncation quirks.

use std::fmt::Write as _;

use super::{edge_count, edge_idx, Instance, Source};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WeightType {
    Euc2d,
    Ceil2d,
    Att,
    Geo,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WeightFormat {
    FullMatrix,
    UpperRow,
    LowerRow,
    UpperDiagRow,
    LowerDiagRow,
}

/// TSPLIB `nint`: `(int)(x + 0.5)`.
fn nint(x: f64) -> i64 {
    (x + 0.5) as i64
}

fn euc_2d(a: (f64, f64), b: (f64, f64)) -> i64 {
    nint((a.0 - b.0).hypot(a.1 - b.1))
}

fn ceil_2d(a: (f64, f64), b: (f64, f64)) -> i64 {
    (a.0 - b.0).hypot(a.1 - b.1).ceil() as i64
}

fn att(a: (f64, f64), b: (f64, f64)) -> i64 {
    let xd = a.0 - b.0;
    let yd = a.1 - b.1;
    let r = ((xd * xd + yd * yd) / 10.0).sqrt();
    let t = nint(r);
    if (t as f64) < r {
        t + 1
    } else {
        t
    }
}

/// DDD.MM coordinate to radians, with TSPLIB's truncated degrees and PI.
#[allow(clippy::approx_constant)]
fn geo_radians(x: f64) -> f64 {
    const PI: f64 = 3.141592;
    let deg = x.trunc();
    let min = x - deg;
    PI * (deg + 5.0 * min / 3.0) / 180.0
}

fn geo(a: (f64, f64), b: (f64, f64)) -> i64 {
    const RRR: f64 = 6378.388;
    if a == b {
        return 0;
    }
    let (lat_a, lon_a) = (geo_radians(a.0), geo_radians(a.1));
    let (lat_b, lon_b) = (geo_radians(b.0), geo_radians(b.1));
    let q1 = (lon_a - lon_b).cos();
    let q2 = (lat_a - lat_b).cos();
    let q3 = (lat_a + lat_b).cos();
    let arg = (0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)).clamp(-1.0, 1.0);
    (RRR * arg.acos() + 1.0) as i64
}

struct Line<'a> {
    no: usize,
    text: &'a str,
}

/// Splits `KEY : VALUE`, `KEY: VALUE` and bare `KEY` lines.
fn split_keyword(text: &str) -> (&str, &str) {
    match text.find(':') {
        Some(pos) => (text[..pos].trim(), text[pos + 1..].trim()),
        None => {
            let t = text.trim();
            match t.find(char::is_whitespace) {
                Some(pos) => (&t[..pos], t[pos..].trim()),
                None => (t, ""),
            }
        }
    }
}

fn starts_with_keyword(text: &str) -> bool {
    text.trim_start()
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic())
}

/// Reads exactly `count` whitespace-separated numbers from consecutive lines.
fn read_numbers(lines: &[Line<'_>], pos: &mut usize, count: usize, what: &str) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let Some(line) = lines.get(*pos) else {
            return Err(Error::structure(format!(
                "{what}: expected {count} values, file ended after {}",
                out.len()
            )));
        };
        if starts_with_keyword(line.text) {
            return Err(Error::structure(format!(
                "{what}: expected {count} values, found {} before line {}",
                out.len(),
                line.no
            )));
        }
        *pos += 1;
        for tok in line.text.split_whitespace() {
            if out.len() == count {
                return Err(Error::structure(format!(
                    "{what}: more than {count} values (line {})",
                    line.no
                )));
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(line.no, format!("bad number `{tok}`")))?;
            out.push((line.no, v));
        }
    }
    Ok(out)
}

fn as_weight(line: usize, v: f64) -> Result<i64> {
    if v.fract() != 0.0 || v < 0.0 {
        return Err(Error::parse(
            line,
            format!("edge weight {v} is not a nonnegative integer"),
        ));
    }
    Ok(v as i64)
}

fn explicit_weights(n: usize, format: WeightFormat, values: &[(usize, f64)]) -> Result<Vec<i64>> {
    let mut weights = vec![0i64; edge_count(n)];
    let mut it = values.iter();
    let mut next = || {
        let &(line, v) = it.next().expect("count checked by caller");
        as_weight(line, v).map(|w| (line, w))
    };
    match format {
        WeightFormat::FullMatrix => {
            let mut full = vec![0i64; n * n];
            for cell in full.iter_mut() {
                *cell = next()?.1;
            }
            for v in 1..n {
                for u in 0..v {
                    let (a, b) = (full[u * n + v], full[v * n + u]);
                    if a != b {
                        return Err(Error::structure(format!(
                            "FULL_MATRIX is asymmetric at ({}, {}): {a} vs {b}",
                            u + 1,
                            v + 1
                        )));
                    }
                    weights[edge_idx(u, v)] = a;
                }
            }
        }
        WeightFormat::UpperRow | WeightFormat::UpperDiagRow => {
            let diag = format == WeightFormat::UpperDiagRow;
            for u in 0..n {
                if diag {
                    next()?;
                }
                for v in u + 1..n {
                    weights[edge_idx(u, v)] = next()?.1;
                }
            }
        }
        WeightFormat::LowerRow | WeightFormat::LowerDiagRow => {
            let diag = format == WeightFormat::LowerDiagRow;
            for v in 0..n {
                for u in 0..v {
                    weights[edge_idx(u, v)] = next()?.1;
                }
                if diag {
                    next()?;
                }
            }
        }
    }
    Ok(weights)
}

fn explicit_count(n: usize, format: WeightFormat) -> usize {
    match format {
        WeightFormat::FullMatrix => n * n,
        WeightFormat::UpperRow | WeightFormat::LowerRow => edge_count(n),
        WeightFormat::UpperDiagRow | WeightFormat::LowerDiagRow => edge_count(n) + n,
    }
}

/// Parses a symmetric TSPLIB95 TSP entry.
pub fn parse_tsplib(text: &str) -> Result<Instance> {
    let lines: Vec<Line<'_>> = text
        .lines()
        .enumerate()
        .map(|(i, t)| Line { no: i + 1, text: t })
        .filter(|l| !l.text.trim().is_empty())
        .collect();

    let mut name = String::new();
    let mut dimension: Option<usize> = None;
    let mut weight_type: Option<WeightType> = None;
    let mut weight_format: Option<WeightFormat> = None;
    let mut coords: Option<Vec<(f64, f64)>> = None;
    let mut explicit: Option<Vec<(usize, f64)>> = None;

    let need_dim = |dimension: Option<usize>, line: usize| {
        dimension.ok_or_else(|| Error::parse(line, "section appears before DIMENSION"))
    };

    let mut pos = 0;
    while pos < lines.len() {
        let line = &lines[pos];
        pos += 1;
        let (key, value) = split_keyword(line.text);
        match key {
            "NAME" => name = value.to_string(),
            "COMMENT" => {}
            "TYPE" => {
                if value != "TSP" {
                    return Err(Error::parse(line.no, format!("unsupported TYPE `{value}`")));
                }
            }
            "DIMENSION" => {
                let d: usize = value
                    .parse()
                    .map_err(|_| Error::parse(line.no, format!("bad DIMENSION `{value}`")))?;
                if d < 3 {
                    return Err(Error::structure(format!("DIMENSION {d} is below 3")));
                }
                dimension = Some(d);
            }
            "EDGE_WEIGHT_TYPE" => {
                weight_type = Some(match value {
                    "EUC_2D" => WeightType::Euc2d,
                    "CEIL_2D" => WeightType::Ceil2d,
                    "ATT" => WeightType::Att,
                    "GEO" => WeightType::Geo,
                    "EXPLICIT" => WeightType::Explicit,
                    other => {
                        return Err(Error::parse(
                            line.no,
                            format!("unsupported EDGE_WEIGHT_TYPE `{other}`"),
                        ))
                    }
                })
            }
            "EDGE_WEIGHT_FORMAT" => {
                weight_format = Some(match value {
                    "FULL_MATRIX" => WeightFormat::FullMatrix,
                    "UPPER_ROW" => WeightFormat::UpperRow,
                    "LOWER_ROW" => WeightFormat::LowerRow,
                    "UPPER_DIAG_ROW" => WeightFormat::UpperDiagRow,
                    "LOWER_DIAG_ROW" => WeightFormat::LowerDiagRow,
                    other => {
                        return Err(Error::parse(
                            line.no,
                            format!("unsupported EDGE_WEIGHT_FORMAT `{other}`"),
                        ))
                    }
                })
            }
            "NODE_COORD_TYPE" => {
                if value != "TWOD_COORDS" {
                    return Err(Error::parse(
                        line.no,
                        format!("unsupported NODE_COORD_TYPE `{value}`"),
                    ));
                }
            }
            // Display data is read past but never used.
            "DISPLAY_DATA_TYPE" => {}
            "DISPLAY_DATA_SECTION" => {
                let n = need_dim(dimension, line.no)?;
                read_numbers(&lines, &mut pos, 3 * n, "DISPLAY_DATA_SECTION")?;
            }
            "NODE_COORD_SECTION" => {
                let n = need_dim(dimension, line.no)?;
                let raw = read_numbers(&lines, &mut pos, 3 * n, "NODE_COORD_SECTION")?;
                let mut pts = vec![None; n];
                for chunk in raw.chunks(3) {
                    let (lno, id) = chunk[0];
                    if id.fract() != 0.0 || id < 1.0 || id as usize > n {
                        return Err(Error::parse(lno, format!("bad node id {id}")));
                    }
                    let slot = &mut pts[id as usize - 1];
                    if slot.is_some() {
                        return Err(Error::parse(lno, format!("duplicate node id {id}")));
                    }
                    *slot = Some((chunk[1].1, chunk[2].1));
                }
                coords = Some(pts.into_iter().map(|p| p.expect("all ids seen")).collect());
            }
            "EDGE_WEIGHT_SECTION" => {
                let n = need_dim(dimension, line.no)?;
                let format = weight_format
                    .ok_or_else(|| Error::parse(line.no, "EDGE_WEIGHT_SECTION without EDGE_WEIGHT_FORMAT"))?;
                let count = explicit_count(n, format);
                explicit = Some(read_numbers(&lines, &mut pos, count, "EDGE_WEIGHT_SECTION")?);
            }
            "EOF" => break,
            other => {
                return Err(Error::UnsupportedKeyword {
                    keyword: other.to_string(),
                    line: line.no,
                })
            }
        }
    }

    let n = dimension.ok_or_else(|| Error::structure("missing DIMENSION"))?;
    let weight_type = weight_type.ok_or_else(|| Error::structure("missing EDGE_WEIGHT_TYPE"))?;
    if name.is_empty() {
        name = "unnamed".to_string();
    }

    match weight_type {
        WeightType::Explicit => {
            let format = weight_format.ok_or_else(|| Error::structure("missing EDGE_WEIGHT_FORMAT"))?;
            let values = explicit.ok_or_else(|| Error::structure("missing EDGE_WEIGHT_SECTION"))?;
            let weights = explicit_weights(n, format, &values)?;
            Instance::from_weights(name, Source::Explicit, n, weights, coords)
        }
        geometric => {
            let pts = coords.ok_or_else(|| Error::structure("missing NODE_COORD_SECTION"))?;
            let dist = match geometric {
                WeightType::Euc2d => euc_2d,
                WeightType::Ceil2d => ceil_2d,
                WeightType::Att => att,
                WeightType::Geo => geo,
                WeightType::Explicit => unreachable!(),
            };
            Instance::from_points(name, Source::Tsplib, pts, dist)
        }
    }
}

/// Renders any instance as an EXPLICIT / UPPER_ROW TSPLIB entry.
pub fn render_explicit(inst: &Instance) -> String {
    let n = inst.n();
    let mut out = String::new();
    let _ = writeln!(out, "NAME: {}", inst.name());
    let _ = writeln!(out, "TYPE: TSP");
    let _ = writeln!(out, "DIMENSION: {n}");
    let _ = writeln!(out, "EDGE_WEIGHT_TYPE: EXPLICIT");
    let _ = writeln!(out, "EDGE_WEIGHT_FORMAT: UPPER_ROW");
    let _ = writeln!(out, "EDGE_WEIGHT_SECTION");
    for u in 0..n - 1 {
        let row: Vec<String> = (u + 1..n).map(|v| inst.w(u, v).to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    let _ = writeln!(out, "EOF");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euc(points: &[(f64, f64)]) -> String {
        let mut s = format!(
            "NAME : t\nTYPE : TSP\nDIMENSION : {}\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n",
            points.len()
        );
        for (i, p) in points.iter().enumerate() {
            s.push_str(&format!("{} {} {}\n", i + 1, p.0, p.1));
        }
        s.push_str("EOF\n");
        s
    }

    #[test]
    fn euc_2d_examples() {
        let inst = parse_tsplib(&euc(&[(0.0, 0.0), (3.0, 4.0), (1.0, 1.0)])).unwrap();
        assert_eq!(inst.edge_weight(0, 1).unwrap(), 5);
        // nint(1.4142...) = 1
        assert_eq!(inst.edge_weight(0, 2).unwrap(), 1);
        assert_eq!(inst.source(), Source::Tsplib);
    }

    #[test]
    fn nint_truncates_after_half_shift() {
        assert_eq!(nint(2.5), 3);
        assert_eq!(nint(2.4999), 2);
    }

    #[test]
    fn att_rounds_up_pseudo_euclidean() {
        // sqrt((100 + 0) / 10) = 3.162.. -> nint 3 < r -> 4
        assert_eq!(att((0.0, 0.0), (10.0, 0.0)), 4);
        // sqrt(1000 / 10) = 10 exactly
        assert_eq!(att((0.0, 0.0), (30.0, 10.0)), 10);
    }

    #[test]
    fn geo_identical_is_zero_and_known_pair() {
        assert_eq!(geo((16.47, 96.10), (16.47, 96.10)), 0);
        // burma14 nodes 1 and 2; TSPLIB distance 153.
        assert_eq!(geo((16.47, 96.10), (16.47, 94.44)), 153);
    }

    #[test]
    fn ceil_2d_rounds_up() {
        assert_eq!(ceil_2d((0.0, 0.0), (1.0, 1.0)), 2);
        assert_eq!(ceil_2d((0.0, 0.0), (3.0, 4.0)), 5);
    }

    #[test]
    fn explicit_formats_agree() {
        // The same 4-vertex matrix in every supported layout.
        let full = [[0, 1, 2, 3], [1, 0, 4, 5], [2, 4, 0, 6], [3, 5, 6, 0]];
        let body = |fmt: &str, rows: Vec<Vec<i64>>| {
            let mut s = format!(
                "NAME: m\nTYPE: TSP\nDIMENSION: 4\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: {fmt}\nEDGE_WEIGHT_SECTION\n"
            );
            for r in rows {
                let r: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                s.push_str(&r.join(" "));
                s.push('\n');
            }
            s.push_str("EOF\n");
            s
        };
        let variants = [
            body("FULL_MATRIX", full.iter().map(|r| r.to_vec()).collect()),
            body("UPPER_ROW", vec![vec![1, 2, 3], vec![4, 5], vec![6]]),
            body("LOWER_ROW", vec![vec![1], vec![2, 4], vec![3, 5, 6]]),
            body(
                "UPPER_DIAG_ROW",
                vec![vec![0, 1, 2, 3], vec![0, 4, 5], vec![0, 6], vec![0]],
            ),
            body(
                "LOWER_DIAG_ROW",
                vec![vec![0], vec![1, 0], vec![2, 4, 0], vec![3, 5, 6, 0]],
            ),
        ];
        for text in &variants {
            let inst = parse_tsplib(text).unwrap();
            for (u, row) in full.iter().enumerate() {
                for (v, &w) in row.iter().enumerate() {
                    if u != v {
                        assert_eq!(inst.edge_weight(u, v).unwrap(), w, "{text}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_unsupported_keyword_with_line() {
        let text = "NAME: x\nTYPE: TSP\nDIMENSION: 3\nCAPACITY: 10\n";
        match parse_tsplib(text) {
            Err(Error::UnsupportedKeyword { keyword, line }) => {
                assert_eq!(keyword, "CAPACITY");
                assert_eq!(line, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_unsupported_weight_type() {
        let text = "NAME: x\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: MAN_2D\n";
        assert!(matches!(parse_tsplib(text), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let short = "NAME: x\nTYPE: TSP\nDIMENSION: 4\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 1\n3 2 2\nEOF\n";
        assert!(matches!(parse_tsplib(short), Err(Error::Structure(_))));
        let long = "NAME: x\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: UPPER_ROW\nEDGE_WEIGHT_SECTION\n1 2 3 4\nEOF\n";
        assert!(matches!(parse_tsplib(long), Err(Error::Structure(_))));
    }

    #[test]
    fn asymmetric_full_matrix_rejected() {
        let text = "NAME: x\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 1 2\n9 0 3\n2 3 0\nEOF\n";
        assert!(matches!(parse_tsplib(text), Err(Error::Structure(_))));
    }

    #[test]
    fn display_data_is_skipped() {
        let text = "NAME: x\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: UPPER_ROW\nDISPLAY_DATA_TYPE: TWOD_DISPLAY\nEDGE_WEIGHT_SECTION\n1 2\n3\nDISPLAY_DATA_SECTION\n1 0 0\n2 1 0\n3 0 1\nEOF\n";
        let inst = parse_tsplib(text).unwrap();
        assert_eq!(inst.weights(), &[1, 2, 3]);
    }

    #[test]
    fn render_then_parse_round_trips() {
        let inst = Instance::from_weights(
            "rt",
            Source::Explicit,
            5,
            (0..10).map(|x| x * 7 % 11).collect(),
            None,
        )
        .unwrap();
        let again = parse_tsplib(&render_explicit(&inst)).unwrap();
        assert_eq!(again, inst);
    }
}
