//! Plain-text network checkpoints.
//!
//! Format: header line `NNV1`, then the layer count, then per layer a dims
//! line (`out in`), an activation tag, `out` lines of row-major weights and
//! one line of biases. Values are written with 9 significant digits, which
//! round-trips f32 exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Activation, NetError, Network};

const HEADER: &str = "NNV1";

pub fn save(net: &Network, path: &Path) -> Result<(), NetError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{HEADER}")?;
    writeln!(w, "{}", net.layers().len())?;
    for layer in net.layers() {
        writeln!(w, "{} {}", layer.out_dim(), layer.in_dim())?;
        writeln!(
            w,
            "{}",
            match layer.activation() {
                Activation::Relu => "relu",
                Activation::Identity => "identity",
            }
        )?;
        for o in 0..layer.out_dim() {
            let row = &layer.weights()[o * layer.in_dim()..(o + 1) * layer.in_dim()];
            write_row(&mut w, row)?;
        }
        write_row(&mut w, layer.bias())?;
    }
    w.flush()?;
    Ok(())
}

fn write_row(w: &mut impl Write, row: &[f32]) -> Result<(), NetError> {
    let mut line = String::with_capacity(row.len() * 16);
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            line.push(' ');
        }
        // 9 significant digits: exact decimal round trip for f32.
        line.push_str(&format!("{v:.8e}"));
    }
    writeln!(w, "{line}")?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Network, NetError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();

    let mut next_line = |what: &str| -> Result<(usize, String), NetError> {
        match lines.next() {
            Some((i, Ok(s))) => Ok((i + 1, s)),
            Some((i, Err(e))) => Err(NetError::Parse {
                line: i + 1,
                msg: e.to_string(),
            }),
            None => Err(NetError::Parse {
                line: 0,
                msg: format!("file truncated, expected {what}"),
            }),
        }
    };

    let (_, header) = next_line("header")?;
    if header.trim() != HEADER {
        return Err(NetError::Version {
            found: header.trim().to_string(),
        });
    }

    let (line_no, count_s) = next_line("layer count")?;
    let layer_count: usize = count_s.trim().parse().map_err(|_| NetError::Parse {
        line: line_no,
        msg: format!("bad layer count {count_s:?}"),
    })?;
    if layer_count == 0 {
        return Err(NetError::Parse {
            line: line_no,
            msg: "zero layers".into(),
        });
    }

    let mut layers = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let (line_no, dims) = next_line("dims line")?;
        let mut it = dims.split_whitespace();
        let parse_dim = |tok: Option<&str>, line: usize| -> Result<usize, NetError> {
            tok.and_then(|t| t.parse::<usize>().ok())
                .filter(|&d| d > 0)
                .ok_or_else(|| NetError::Parse {
                    line,
                    msg: format!("bad dims line {dims:?}"),
                })
        };
        let out_dim = parse_dim(it.next(), line_no)?;
        let in_dim = parse_dim(it.next(), line_no)?;

        let (line_no, act_s) = next_line("activation tag")?;
        let activation = match act_s.trim() {
            "relu" => Activation::Relu,
            "identity" => Activation::Identity,
            other => {
                return Err(NetError::Parse {
                    line: line_no,
                    msg: format!("unknown activation {other:?}"),
                })
            }
        };

        let mut weights = Vec::with_capacity(in_dim * out_dim);
        for _ in 0..out_dim {
            let (line_no, row) = next_line("weight row")?;
            parse_row(&row, in_dim, line_no, &mut weights)?;
        }
        let mut bias = Vec::with_capacity(out_dim);
        let (line_no, brow) = next_line("bias row")?;
        parse_row(&brow, out_dim, line_no, &mut bias)?;

        layers.push(Network::make_layer(in_dim, out_dim, weights, bias, activation));
    }

    for pair in layers.windows(2) {
        if pair[0].out_dim() != pair[1].in_dim() {
            return Err(NetError::Parse {
                line: 0,
                msg: format!(
                    "layer dims do not chain: {} then {}",
                    pair[0].out_dim(),
                    pair[1].in_dim()
                ),
            });
        }
    }
    Ok(Network::from_layers(layers))
}

fn parse_row(line: &str, expect: usize, line_no: usize, out: &mut Vec<f32>) -> Result<(), NetError> {
    let start = out.len();
    for tok in line.split_whitespace() {
        let v: f32 = tok.parse().map_err(|_| NetError::Parse {
            line: line_no,
            msg: format!("bad value {tok:?}"),
        })?;
        if !v.is_finite() {
            return Err(NetError::Parse {
                line: line_no,
                msg: format!("non-finite value {tok:?}"),
            });
        }
        out.push(v);
    }
    if out.len() - start != expect {
        return Err(NetError::Parse {
            line: line_no,
            msg: format!("expected {expect} values, got {}", out.len() - start),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::init_network;
    use super::*;

    #[test]
    fn round_trip_preserves_forward_outputs_exactly() {
        let net = init_network(&[7, 6, 4], 31).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.nnv1");
        save(&net, &path).unwrap();
        let loaded = load(&path).unwrap();

        assert_eq!(loaded.layer_sizes(), net.layer_sizes());
        for (a, b) in net.layers().iter().zip(loaded.layers()) {
            assert_eq!(a.weights(), b.weights());
            assert_eq!(a.bias(), b.bias());
            assert_eq!(a.activation(), b.activation());
        }
        let x: Vec<f32> = (0..7).map(|i| (i as f32).sin()).collect();
        assert_eq!(net.forward(&x).0, loaded.forward(&x).0);

        // Saving the loaded network reproduces the file byte for byte.
        let path2 = dir.path().join("net2.nnv1");
        save(&loaded, &path2).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn version_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.nnv1");
        std::fs::write(&path, "NNV9\n1\n2 2\nidentity\n1 0\n0 1\n0 0\n").unwrap();
        match load(&path) {
            Err(NetError::Version { found }) => assert_eq!(found, "NNV9"),
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_file_is_an_error() {
        let net = init_network(&[5, 4, 2], 8).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.nnv1");
        save(&net, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let cut: String = text.lines().take(6).collect::<Vec<_>>().join("\n");
        let tpath = dir.path().join("cut.nnv1");
        std::fs::write(&tpath, cut).unwrap();
        assert!(matches!(load(&tpath), Err(NetError::Parse { .. })));
    }

    #[test]
    fn malformed_rows_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.nnv1");
        std::fs::write(&path, "NNV1\n1\n2 2\nrelu\n1 2\n3 oops\n0 0\n").unwrap();
        match load(&path) {
            Err(NetError::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
