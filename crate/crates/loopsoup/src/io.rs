//! Text formats: soups, hulls, PBM bitmaps and result tables.

use std::fmt::Write as _;
use std::path::Path;

use loopsoup_core::capacity::{Hull, Shape};
use loopsoup_core::fractal::FractalPercolation;
use loopsoup_core::lattice::{Dir, LatticeDomain, Point};
use loopsoup_core::{Loop, LoopSoup};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One line per loop, `x y DIRS`, after a `#soup` header.
pub fn write_soup(soup: &LoopSoup) -> String {
    let d = soup.domain();
    let mut out = format!(
        "#soup c={} W={} H={} mesh={} maxlen={} seed={}",
        soup.intensity(),
        d.width(),
        d.height(),
        d.mesh(),
        soup.max_len(),
        soup.seed()
    );
    if d.origin() != Point::new(0, 0) {
        let _ = write!(out, " origin={},{}", d.origin().x, d.origin().y);
    }
    out.push('\n');
    for l in soup.loops() {
        let _ = write!(out, "{} {} ", l.root().x, l.root().y);
        out.extend(l.steps().iter().map(|d| d.as_char()));
        out.push('\n');
    }
    out
}

pub fn read_soup(text: &str) -> Result<LoopSoup> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty soup file"))?;
    let fields = header
        .strip_prefix("#soup")
        .ok_or_else(|| Error::parse(1, "missing #soup header"))?;
    let (mut c, mut w, mut h, mut mesh, mut max_len, mut seed, mut origin) =
        (None, None, None, None, None, None, Point::new(0, 0));
    for kv in fields.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::parse(1, format!("bad header field {kv:?}")))?;
        let bad = || Error::parse(1, format!("bad value for {k}"));
        match k {
            "c" => c = Some(v.parse::<f64>().map_err(|_| bad())?),
            "W" => w = Some(v.parse::<u32>().map_err(|_| bad())?),
            "H" => h = Some(v.parse::<u32>().map_err(|_| bad())?),
            "mesh" => mesh = Some(v.parse::<f64>().map_err(|_| bad())?),
            "maxlen" => max_len = Some(v.parse::<u32>().map_err(|_| bad())?),
            "seed" => seed = Some(v.parse::<u64>().map_err(|_| bad())?),
            "origin" => {
                let (x, y) = v.split_once(',').ok_or_else(bad)?;
                origin = Point::new(x.parse().map_err(|_| bad())?, y.parse().map_err(|_| bad())?);
            }
            _ => return Err(Error::parse(1, format!("unknown header field {k}"))),
        }
    }
    let missing = |name: &str| Error::parse(1, format!("header lacks {name}"));
    let domain = LatticeDomain::with_origin(
        origin,
        w.ok_or_else(|| missing("W"))?,
        h.ok_or_else(|| missing("H"))?,
        mesh.ok_or_else(|| missing("mesh"))?,
    )?;
    let mut loops = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut next = || parts.next().ok_or_else(|| Error::parse(i + 1, "expected `x y DIRS`"));
        let x = next()?.parse::<i32>().map_err(|_| Error::parse(i + 1, "bad x"))?;
        let y = next()?.parse::<i32>().map_err(|_| Error::parse(i + 1, "bad y"))?;
        let steps = next()?
            .chars()
            .map(Dir::from_char)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::parse(i + 1, "bad direction"))?;
        let l = Loop::new(Point::new(x, y), steps).ok_or_else(|| Error::parse(i + 1, "walk is not closed"))?;
        loops.push(l);
    }
    Ok(LoopSoup::from_parts(
        loops,
        c.ok_or_else(|| missing("c"))?,
        domain,
        max_len.ok_or_else(|| missing("maxlen"))?,
        seed.ok_or_else(|| missing("seed"))?,
    )?)
}

/// Lines `seg x0 y0 x1 y1` and `box x0 y0 x1 y1`; `#` starts a comment.
pub fn parse_hull(text: &str) -> Result<Hull> {
    let mut shapes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let kind = parts.next().unwrap_or_default();
        let v = parts
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::parse(i + 1, "bad coordinate"))?;
        if v.len() != 4 {
            return Err(Error::parse(i + 1, "expected four coordinates"));
        }
        shapes.push(match kind {
            "seg" => Shape::segment(v[0], v[1], v[2], v[3]),
            "box" => Shape::rect(v[0], v[1], v[2], v[3]),
            other => return Err(Error::parse(i + 1, format!("unknown shape {other:?}"))),
        });
    }
    Ok(Hull::new(shapes)?)
}

pub fn format_hull(hull: &Hull) -> String {
    let mut out = String::new();
    for s in hull.shapes() {
        let _ = match *s {
            Shape::Segment { a, b } => writeln!(out, "seg {} {} {} {}", a.x, a.y, b.x, b.y),
            Shape::Box { min, max } => writeln!(out, "box {} {} {} {}", min.x, min.y, max.x, max.y),
        };
    }
    out
}

/// Plain PBM of the deepest level, top row first.
pub fn fractal_pbm(fp: &FractalPercolation) -> String {
    let side = fp.side();
    let mask = fp.mask();
    let mut out = format!("P1\n{side} {side}\n");
    for j in (0..side).rev() {
        let row: Vec<&str> = (0..side).map(|i| if mask[j * side + i] { "1" } else { "0" }).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// A row of the common result table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub c: f64,
    pub stat: String,
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n: u64,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
