//! Text format for triplet coefficient sets.
//!
//! One document per triplet: scalar fields, the node vector, the seven
//! coefficient matrices, the weight matrix and the Laurent data of the
//! sparse matrix Bhat. Numeric entries may be rationals `p/q` or decimals;
//! exported decimals use the shortest representation that round-trips, so
//! an export/import cycle reproduces every entry bit for bit.

use crate::linalg::Mat;
use crate::triplet::{BHat, Laurent, Orders, PeerTriplet, TripletError};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum CoeffFileError {
    Parse { field: String, message: String },
    MissingField { field: String },
    Validation(TripletError),
}

impl fmt::Display for CoeffFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffFileError::Parse { field, message } => {
                write!(f, "parse error in field '{}': {}", field, message)
            }
            CoeffFileError::MissingField { field } => write!(f, "missing field '{}'", field),
            CoeffFileError::Validation(e) => write!(f, "validation error: {}", e),
        }
    }
}

impl std::error::Error for CoeffFileError {}

impl From<TripletError> for CoeffFileError {
    fn from(e: TripletError) -> Self {
        CoeffFileError::Validation(e)
    }
}

fn fmt_f64(v: f64) -> String {
    // Shortest round-trip form; keep a decimal point so the field is
    // recognizably numeric.
    let s = format!("{}", v);
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{}.0", s)
    }
}

/// Serialize a triplet.
pub fn export_coefficients(t: &PeerTriplet) -> String {
    let mut out = String::new();
    out.push_str(&format!("name {}\n", t.name));
    out.push_str(&format!("s {}\n", t.s));
    out.push_str(&format!(
        "orders {} {} {} {}\n",
        t.orders.r,
        t.orders.q,
        t.orders.r1,
        t.orders.q_b.map_or("inf".to_string(), |q| q.to_string())
    ));
    out.push_str(&format!(
        "sigma_interval {} {}\n",
        fmt_f64(t.sigma_interval.0),
        fmt_f64(t.sigma_interval.1)
    ));
    out.push_str("c");
    for v in &t.c {
        out.push_str(&format!(" {}", fmt_f64(*v)));
    }
    out.push('\n');
    for (label, m) in [
        ("A0", &t.a0),
        ("K0", &t.k0),
        ("A", &t.a),
        ("K", &t.k),
        ("AN", &t.an),
        ("KN", &t.kn),
        ("W", &t.w),
    ] {
        out.push_str(label);
        out.push('\n');
        for i in 0..m.rows() {
            let row: Vec<String> = m.row(i).iter().map(|v| fmt_f64(*v)).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    let s = t.s;
    out.push_str(&format!("bhat a1{} {}\n", s, fmt_f64(t.bhat.a_1s)));
    out.push_str(&format!("bhat a{}1 {}\n", s, fmt_f64(t.bhat.a_s1)));
    let laurent_line = |key: String, p: &Laurent| -> String {
        let mut line = format!("bhat {}", key);
        for &(e, c) in p.terms() {
            line.push_str(&format!(" {} {}", e, fmt_f64(c)));
        }
        line.push('\n');
        line
    };
    for (i, p) in t.bhat.east.iter().enumerate() {
        out.push_str(&laurent_line(format!("b{}{}", i + 2, s), p));
    }
    for (j, p) in t.bhat.south.iter().enumerate() {
        out.push_str(&laurent_line(format!("b{}{}", s, j + 2), p));
    }
    out.push_str(&laurent_line(format!("b{}{}", s, s), &t.bhat.corner));
    out
}

fn parse_number(field: &str, token: &str) -> Result<f64, CoeffFileError> {
    if let Some((num, den)) = token.split_once('/') {
        let n: i64 = num.trim().parse().map_err(|_| CoeffFileError::Parse {
            field: field.to_string(),
            message: format!("bad rational numerator '{}'", num),
        })?;
        let d: i64 = den.trim().parse().map_err(|_| CoeffFileError::Parse {
            field: field.to_string(),
            message: format!("bad rational denominator '{}'", den),
        })?;
        if d == 0 {
            return Err(CoeffFileError::Parse {
                field: field.to_string(),
                message: "zero denominator".to_string(),
            });
        }
        Ok(n as f64 / d as f64)
    } else {
        token.parse().map_err(|_| CoeffFileError::Parse {
            field: field.to_string(),
            message: format!("bad number '{}'", token),
        })
    }
}

/// Parse a coefficient document.
pub fn import_coefficients(text: &str) -> Result<PeerTriplet, CoeffFileError> {
    let mut name: Option<String> = None;
    let mut s: Option<usize> = None;
    let mut orders: Option<Orders> = None;
    let mut sigma_interval: Option<(f64, f64)> = None;
    let mut c: Option<Vec<f64>> = None;
    let mut mats: std::collections::BTreeMap<String, Mat> = Default::default();
    let mut bhat_entries: std::collections::BTreeMap<String, Vec<(i32, f64)>> = Default::default();
    let mut bhat_scalars: std::collections::BTreeMap<String, f64> = Default::default();

    let mut lines = text
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .peekable();

    while let Some(line) = lines.next() {
        let mut tokens = line.split_whitespace();
        let key = tokens.next().unwrap();
        match key {
            "name" => {
                name = Some(tokens.collect::<Vec<_>>().join(" "));
            }
            "s" => {
                let tok = tokens.next().ok_or_else(|| CoeffFileError::Parse {
                    field: "s".into(),
                    message: "missing value".into(),
                })?;
                s = Some(tok.parse().map_err(|_| CoeffFileError::Parse {
                    field: "s".into(),
                    message: format!("bad stage count '{}'", tok),
                })?);
            }
            "orders" => {
                let vals: Vec<&str> = tokens.collect();
                if vals.len() != 4 {
                    return Err(CoeffFileError::Parse {
                        field: "orders".into(),
                        message: "expected r q r1 q_b".into(),
                    });
                }
                let parse_usize = |tok: &str| -> Result<usize, CoeffFileError> {
                    tok.parse().map_err(|_| CoeffFileError::Parse {
                        field: "orders".into(),
                        message: format!("bad order '{}'", tok),
                    })
                };
                let q_b = if vals[3] == "inf" {
                    None
                } else {
                    Some(parse_usize(vals[3])?)
                };
                orders = Some(Orders {
                    r: parse_usize(vals[0])?,
                    q: parse_usize(vals[1])?,
                    r1: parse_usize(vals[2])?,
                    q_b,
                });
            }
            "sigma_interval" => {
                let vals: Vec<&str> = tokens.collect();
                if vals.len() != 2 {
                    return Err(CoeffFileError::Parse {
                        field: "sigma_interval".into(),
                        message: "expected two endpoints".into(),
                    });
                }
                sigma_interval = Some((
                    parse_number("sigma_interval", vals[0])?,
                    parse_number("sigma_interval", vals[1])?,
                ));
            }
            "c" => {
                let mut nodes = Vec::new();
                for tok in tokens {
                    nodes.push(parse_number("c", tok)?);
                }
                c = Some(nodes);
            }
            "A0" | "K0" | "A" | "K" | "AN" | "KN" | "W" => {
                let stages = s.ok_or_else(|| CoeffFileError::Parse {
                    field: key.into(),
                    message: "matrix before stage count".into(),
                })?;
                let mut rows: Vec<Vec<f64>> = Vec::with_capacity(stages);
                for _ in 0..stages {
                    let row_line = lines.next().ok_or_else(|| CoeffFileError::Parse {
                        field: key.into(),
                        message: "missing matrix row".into(),
                    })?;
                    let row: Result<Vec<f64>, _> = row_line
                        .split_whitespace()
                        .map(|tok| parse_number(key, tok))
                        .collect();
                    let row = row?;
                    if row.len() != stages {
                        return Err(CoeffFileError::Parse {
                            field: key.into(),
                            message: format!(
                                "matrix row has {} entries, expected {}",
                                row.len(),
                                stages
                            ),
                        });
                    }
                    rows.push(row);
                }
                let slices: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
                mats.insert(key.to_string(), Mat::from_rows(&slices));
            }
            "bhat" => {
                let entry = tokens.next().ok_or_else(|| CoeffFileError::Parse {
                    field: "bhat".into(),
                    message: "missing entry key".into(),
                })?;
                let vals: Vec<&str> = tokens.collect();
                if entry.starts_with('a') {
                    if vals.len() != 1 {
                        return Err(CoeffFileError::Parse {
                            field: format!("bhat {}", entry),
                            message: "expected one value".into(),
                        });
                    }
                    bhat_scalars.insert(
                        entry.to_string(),
                        parse_number(&format!("bhat {}", entry), vals[0])?,
                    );
                } else {
                    if vals.len() % 2 != 0 {
                        return Err(CoeffFileError::Parse {
                            field: format!("bhat {}", entry),
                            message: "expected exponent/coefficient pairs".into(),
                        });
                    }
                    let mut terms = Vec::new();
                    for pair in vals.chunks(2) {
                        let e: i32 = pair[0].parse().map_err(|_| CoeffFileError::Parse {
                            field: format!("bhat {}", entry),
                            message: format!("bad exponent '{}'", pair[0]),
                        })?;
                        let coeff = parse_number(&format!("bhat {}", entry), pair[1])?;
                        terms.push((e, coeff));
                    }
                    bhat_entries.insert(entry.to_string(), terms);
                }
            }
            other => {
                return Err(CoeffFileError::Parse {
                    field: other.into(),
                    message: "unknown field".into(),
                });
            }
        }
    }

    let name = name.ok_or_else(|| CoeffFileError::MissingField {
        field: "name".into(),
    })?;
    let s = s.ok_or_else(|| CoeffFileError::MissingField { field: "s".into() })?;
    let orders = orders.ok_or_else(|| CoeffFileError::MissingField {
        field: "orders".into(),
    })?;
    let sigma_interval = sigma_interval.ok_or_else(|| CoeffFileError::MissingField {
        field: "sigma_interval".into(),
    })?;
    let c = c.ok_or_else(|| CoeffFileError::MissingField { field: "c".into() })?;
    let mut take = |label: &str| -> Result<Mat, CoeffFileError> {
        mats.remove(label)
            .ok_or_else(|| CoeffFileError::MissingField {
                field: label.into(),
            })
    };
    let a0 = take("A0")?;
    let k0 = take("K0")?;
    let a = take("A")?;
    let k = take("K")?;
    let an = take("AN")?;
    let kn = take("KN")?;
    let w = take("W")?;

    if bhat_scalars.is_empty() && bhat_entries.is_empty() {
        return Err(CoeffFileError::MissingField {
            field: "bhat".into(),
        });
    }
    let a_1s =
        *bhat_scalars
            .get(&format!("a1{}", s))
            .ok_or_else(|| CoeffFileError::MissingField {
                field: format!("bhat a1{}", s),
            })?;
    let a_s1 =
        *bhat_scalars
            .get(&format!("a{}1", s))
            .ok_or_else(|| CoeffFileError::MissingField {
                field: format!("bhat a{}1", s),
            })?;
    let mut laurent = |key: String| -> Result<Laurent, CoeffFileError> {
        match bhat_entries.remove(&key) {
            Some(terms) => Ok(Laurent::new(terms)),
            None => Err(CoeffFileError::MissingField {
                field: format!("bhat {}", key),
            }),
        }
    };
    let mut east = Vec::new();
    for i in 2..s {
        east.push(laurent(format!("b{}{}", i, s))?);
    }
    let mut south = Vec::new();
    for j in 2..s {
        south.push(laurent(format!("b{}{}", s, j))?);
    }
    let corner = laurent(format!("b{}{}", s, s))?;

    let triplet = PeerTriplet {
        name,
        s,
        c,
        a0,
        k0,
        a,
        k,
        an,
        kn,
        bhat: BHat {
            a_1s,
            a_s1,
            east,
            south,
            corner,
        },
        w,
        orders,
        sigma_interval,
    };
    triplet.validate()?;
    Ok(triplet)
}
