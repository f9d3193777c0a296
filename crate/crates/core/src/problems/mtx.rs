use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::LinearMap;

/// Reads a coordinate-format Matrix Market file (`real` or `integer`,
/// `general` or `symmetric`). Indices are 1-based; duplicates are summed.
pub fn read_matrix_market(path: &Path) -> Result<LinearMap> {
    let text = std::fs::read_to_string(path)?;
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(err(hline, format!("malformed header `{header}`")));
    }
    if tokens[2] != "coordinate" {
        return Err(err(
            hline,
            format!("unsupported format `{}`; only coordinate is read", tokens[2]),
        ));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(err(hline, format!("unsupported field `{}`", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(err(hline, format!("unsupported symmetry `{other}`"))),
    };
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (sline, size) = body.next().ok_or_else(|| err(hline, "missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| err(sline, format!("bad size line `{size}`: {e}")))?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(err(sline, format!("size line needs three integers, got `{size}`")));
    };
    let mut trip = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    let mut count = 0;
    for (ln, l) in body {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() != 3 {
            return Err(err(ln, format!("expected `row col value`, got `{l}`")));
        }
        let parse_idx = |s: &str, bound: usize, what: &str| -> Result<usize> {
            let v: usize = s
                .parse()
                .map_err(|_| err(ln, format!("non-numeric {what} index `{s}`")))?;
            if v == 0 || v > bound {
                return Err(err(ln, format!("{what} index {v} out of range 1..={bound}")));
            }
            Ok(v - 1)
        };
        let i = parse_idx(t[0], rows, "row")?;
        let j = parse_idx(t[1], cols, "column")?;
        let v: f64 = t[2]
            .parse()
            .map_err(|_| err(ln, format!("non-numeric value `{}`", t[2])))?;
        if !v.is_finite() {
            return Err(err(ln, format!("non-finite value `{}`", t[2])));
        }
        trip.push((i, j, v));
        if symmetric && i != j {
            trip.push((j, i, v));
        }
        count += 1;
        if count > nnz {
            return Err(err(ln, format!("more entries than the declared {nnz}")));
        }
    }
    if count < nnz {
        return Err(err(sline, format!("declared {nnz} entries, found {count}")));
    }
    LinearMap::from_triplets(rows, cols, &trip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn diagonal() {
        let f = file("%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 1.0\n2 2 2.0\n");
        let k = read_matrix_market(f.path()).unwrap();
        assert_eq!(k.to_dense(), vec![1.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn duplicates_summed() {
        let f = file("%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.0\n1 1 0.5\n");
        assert_eq!(read_matrix_market(f.path()).unwrap().to_dense(), vec![1.5]);
    }

    #[test]
    fn symmetric_mirrors() {
        let f = file("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 3.0\n1 1 1.0\n");
        assert_eq!(
            read_matrix_market(f.path()).unwrap().to_dense(),
            vec![1.0, 3.0, 3.0, 0.0]
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("%%MatrixMarket matrix array real general\n1 1\n1.0\n", 1),
            ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", 3),
            (
                "%%MatrixMarket matrix coordinate real general\n% c\n2 2 1\n1 x 1.0\n",
                4,
            ),
            ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n", 3),
            ("%%MatrixMarket matrix coordinate real general\n2 two 1\n", 2),
        ];
        for (text, want) in cases {
            let f = file(text);
            match read_matrix_market(f.path()) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text}"),
                other => panic!("expected parse error, got {other:?}"),
            }
        }
    }
}
