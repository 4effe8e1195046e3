//! BonnMotion-style movement files: one line per node, whitespace-separated
//! `t x y` triples with non-decreasing times. Fixed 6-decimal output.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::trace::{NodeTrace, Scenario, Waypoint};

/// Geometry attached to an imported trace file (the format itself carries
/// none of it).
#[derive(Clone, Copy, Debug)]
pub struct ImportGeometry {
    pub area_width: f64,
    pub area_height: f64,
    pub duration: f64,
    pub radio_range: f64,
}

impl ImportGeometry {
    pub fn of(scenario: &Scenario) -> Self {
        ImportGeometry {
            area_width: scenario.area_width,
            area_height: scenario.area_height,
            duration: scenario.duration,
            radio_range: scenario.radio_range,
        }
    }
}

pub fn export_bonnmotion(scenario: &Scenario) -> String {
    let mut out = String::new();
    for trace in &scenario.traces {
        let mut first = true;
        for wp in &trace.waypoints {
            if !first {
                out.push(' ');
            }
            first = false;
            out.push_str(&format!(
                "{:.6} {:.6} {:.6}",
                wp.time, wp.position.x, wp.position.y
            ));
        }
        out.push('\n');
    }
    out
}

/// Parse a movement file. Malformed triples, time regressions, and
/// out-of-bounds points are parse errors naming line and column (1-based
/// character offset of the offending token).
pub fn import_bonnmotion(text: &str, geometry: &ImportGeometry) -> Result<Scenario> {
    let mut traces = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let node_id = traces.len();
        traces.push(parse_line(line, lineno + 1, node_id, geometry)?);
    }
    Ok(Scenario {
        area_width: geometry.area_width,
        area_height: geometry.area_height,
        duration: geometry.duration,
        radio_range: geometry.radio_range,
        traces,
    })
}

/// Whitespace-separated tokens with their 1-based starting columns.
fn tokens_with_columns(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_line(
    line: &str,
    lineno: usize,
    node_id: usize,
    geometry: &ImportGeometry,
) -> Result<NodeTrace> {
    let tokens = tokens_with_columns(line);
    if tokens.len() % 3 != 0 {
        let (col, _) = tokens[tokens.len() - (tokens.len() % 3)];
        return Err(Error::parse(
            lineno,
            col,
            format!("incomplete waypoint triple ({} trailing tokens)", tokens.len() % 3),
        ));
    }

    let number = |idx: usize| -> Result<f64> {
        let (col, tok) = tokens[idx];
        tok.parse::<f64>()
            .map_err(|_| Error::parse(lineno, col, format!("expected a number, got '{tok}'")))
    };

    let mut waypoints = Vec::with_capacity(tokens.len() / 3);
    let mut prev_time = f64::NEG_INFINITY;
    for w in 0..tokens.len() / 3 {
        let (t_col, _) = tokens[3 * w];
        let t = number(3 * w)?;
        let x = number(3 * w + 1)?;
        let y = number(3 * w + 2)?;
        if t < prev_time {
            return Err(Error::parse(
                lineno,
                t_col,
                format!("time regression ({prev_time} -> {t})"),
            ));
        }
        if !(0.0..=geometry.area_width).contains(&x) || !(0.0..=geometry.area_height).contains(&y)
        {
            let (col, _) = tokens[3 * w + 1];
            return Err(Error::parse(
                lineno,
                col,
                format!(
                    "point ({x}, {y}) outside the {}x{} area",
                    geometry.area_width, geometry.area_height
                ),
            ));
        }
        prev_time = t;
        waypoints.push(Waypoint::new(t, Vec2::new(x, y)));
    }
    Ok(NodeTrace::new(node_id, waypoints))
}
