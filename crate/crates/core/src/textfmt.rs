//! Plain-text hypergraph files.
//!
//! ```text
//! # optional comments
//! k n m
//! v0 v1 ... v(k-1)    (m lines, 0-based, increasing)
//! ```
//!
//! Writing emits edges in colex rank order, so `write(read(write(h)))` is
//! byte-identical to `write(h)`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

pub fn to_string(h: &Hypergraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", h.k(), h.n(), h.edge_count());
    for t in h.tuples() {
        let line: Vec<String> = t.iter().map(usize::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write<W: Write>(h: &Hypergraph, mut w: W) -> Result<()> {
    w.write_all(to_string(h).as_bytes())?;
    Ok(())
}

pub fn read<R: BufRead>(r: R) -> Result<Hypergraph> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let nums = trimmed
            .split_whitespace()
            .map(|tok| tok.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: lineno,
                msg: e.to_string(),
            })?;
        match header {
            None => {
                if nums.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "header must be `k n m`".into(),
                    });
                }
                header = Some((nums[0], nums[1], nums[2]));
            }
            Some((k, n, _)) => {
                if nums.len() != k {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("expected {k} vertices, found {}", nums.len()),
                    });
                }
                if nums.windows(2).any(|w| w[0] >= w[1]) || nums.iter().any(|&v| v >= n) {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "vertices must be increasing and below n".into(),
                    });
                }
                tuples.push(nums);
            }
        }
    }
    let (k, n, m) = header.ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    if tuples.len() != m {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header announces {m} edges, found {}", tuples.len()),
        });
    }
    let h = Hypergraph::from_tuples(n, k, &tuples)?;
    if h.edge_count() as usize != m {
        return Err(Error::Parse {
            line: 0,
            msg: "duplicate edges".into(),
        });
    }
    Ok(h)
}

pub fn read_path(path: &std::path::Path) -> Result<Hypergraph> {
    read(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn write_path(h: &Hypergraph, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, to_string(h))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comments_and_canonicalizes() {
        let text = "# a triangle\n2 3 3\n1 2\n0 1\n# mid comment\n0 2\n";
        let h = read(text.as_bytes()).unwrap();
        assert_eq!(h.edge_count(), 3);
        assert_eq!(to_string(&h), "2 3 3\n0 1\n0 2\n1 2\n");
    }

    #[test]
    fn rejects_malformed() {
        assert!(read("2 3\n".as_bytes()).is_err());
        assert!(read("2 3 1\n1 0\n".as_bytes()).is_err());
        assert!(read("2 3 1\n0 3\n".as_bytes()).is_err());
        assert!(read("2 3 2\n0 1\n".as_bytes()).is_err());
        assert!(read("2 3 2\n0 1\n0 1\n".as_bytes()).is_err());
        assert!(read("2 3 1\n0 x\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn write_read_write_is_stable(n in 2usize..=10, k in 1usize..=4, p in 0.0f64..1.0,
                                      seed in any::<u64>()) {
            prop_assume!(k <= n);
            let h = Hypergraph::sample(n, k, p, seed).unwrap();
            let text = to_string(&h);
            let back = read(text.as_bytes()).unwrap();
            prop_assert_eq!(&back, &h);
            prop_assert_eq!(to_string(&back), text);
        }
    }
}
