//! `GRIDFN v1` grid-function files.
//!
//! ```text
//! GRIDFN v1
//! dim=2
//! box=0:1,0:1
//! h=0.25
//! <value>
//! ...
//! ```
//!
//! Values are listed row-major with the last axis fastest. All numbers are
//! written with 17 significant digits, so binary64 values round-trip exactly.

use std::fs;
use std::path::Path;

use debound_core::{Grid, GridFunction, Interval};

use crate::error::CliError;
use crate::output::num;

pub const MAGIC: &str = "GRIDFN v1";

pub fn to_string(u: &GridFunction) -> String {
    let grid = u.grid();
    let bounds: Vec<String> = grid.bounds().iter().map(|b| format!("{}:{}", num(b.lo), num(b.hi))).collect();
    let mut out = format!("{MAGIC}\ndim={}\nbox={}\nh={}\n", grid.n(), bounds.join(","), num(grid.h()));
    for v in u.values() {
        out.push_str(&num(*v));
        out.push('\n');
    }
    out
}

pub fn write(path: &Path, u: &GridFunction) -> Result<(), CliError> {
    fs::write(path, to_string(u)).map_err(|e| CliError::io(path, e))
}

fn header<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str, String> {
    let line = line.ok_or_else(|| format!("missing {key}= line"))?;
    line.trim()
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| format!("expected {key}=..., got {line:?}"))
}

fn parse_f64(s: &str, what: &str) -> Result<f64, String> {
    s.trim().parse().map_err(|_| format!("bad {what}: {s:?}"))
}

pub fn parse(text: &str) -> Result<GridFunction, String> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(MAGIC) {
        return Err(format!("not a {MAGIC} file"));
    }
    let dim: usize = header(lines.next(), "dim")?.parse().map_err(|_| "bad dim".to_string())?;
    let bounds = header(lines.next(), "box")?
        .split(',')
        .map(|pair| {
            let (lo, hi) = pair.split_once(':').ok_or_else(|| format!("bad box entry {pair:?}"))?;
            Ok(Interval::new(parse_f64(lo, "box")?, parse_f64(hi, "box")?))
        })
        .collect::<Result<Vec<_>, String>>()?;
    if bounds.len() != dim {
        return Err(format!("dim={dim} but box lists {} intervals", bounds.len()));
    }
    let h = parse_f64(header(lines.next(), "h")?, "h")?;
    let grid = Grid::new(&bounds, h).map_err(|e| e.to_string())?;
    let values = lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| parse_f64(l, &format!("value #{i}")))
        .collect::<Result<Vec<_>, String>>()?;
    GridFunction::new(grid, values).map_err(|e| e.to_string())
}

pub fn read(path: &Path) -> Result<GridFunction, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|msg| CliError::Format { path: path.to_path_buf(), msg })
}
