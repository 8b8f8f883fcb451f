//! Trace CSV, JSON summary and SVG plots.
//!
//! Every float is written as `{:.16e}` (17 significant digits), so a value
//! read back is bit-identical and equal inputs give byte-identical files.

use anyhow::{Context, Result};
use imcf_core::functionals::FunctionalRecord;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use std::io::{self, Write};
use std::path::Path;

pub const TRACE_COLUMNS: [&str; 11] = [
    "t",
    "area",
    "A",
    "I",
    "J",
    "L",
    "calK",
    "Q",
    "min_H",
    "lambda_min",
    "umbilicity",
];

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trace<W: Write>(out: W, records: &[FunctionalRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for r in records {
        let row = [
            r.t,
            r.area,
            r.area_ratio,
            r.rho_h,
            r.support,
            r.weighted_volume,
            r.area_power,
            r.monotone_q,
            r.min_h,
            r.lambda_min,
            r.umbilicity,
        ];
        w.write_record(row.iter().map(|&x| format_float(x)))?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with fixed float formatting.
struct FixedFloats<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

/// A static line plot of `ys` against `xs`.
pub fn line_plot(title: &str, x_label: &str, xs: &[f64], ys: &[f64]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 60.0;
    let finite = |v: &[f64]| {
        v.iter()
            .copied()
            .filter(|x| x.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            })
    };
    let (mut x0, mut x1) = finite(xs);
    let (mut y0, mut y1) = finite(ys);
    if !(x0 < x1) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if !(y0 < y1) {
        let pad = 0.5 * y0.abs().max(1e-12);
        y0 -= pad;
        y1 += pad;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let points: Vec<String> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
        W / 2.0,
        escape(title)
    ));
    svg.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"black\" points=\"{PAD},{top} {PAD},{bottom} {right},{bottom}\"/>\n",
        top = PAD,
        bottom = H - PAD,
        right = W - PAD
    ));
    let label = |x: f64, y: f64, anchor: &str, text: &str| {
        format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            escape(text)
        )
    };
    svg.push_str(&label(PAD, H - PAD + 16.0, "middle", &format!("{x0:.4}")));
    svg.push_str(&label(
        W - PAD,
        H - PAD + 16.0,
        "middle",
        &format!("{x1:.4}"),
    ));
    svg.push_str(&label(W / 2.0, H - 15.0, "middle", x_label));
    svg.push_str(&label(PAD - 6.0, H - PAD, "end", &format!("{y0:.4e}")));
    svg.push_str(&label(PAD - 6.0, PAD + 4.0, "end", &format!("{y1:.4e}")));
    svg.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        points.join(" ")
    ));
    svg.push_str("</svg>\n");
    svg
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Writes the Q(t) and A(t) plots into `dir`.
pub fn write_plots(dir: &Path, records: &[FunctionalRecord]) -> Result<()> {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let q: Vec<f64> = records.iter().map(|r| r.monotone_q).collect();
    let a: Vec<f64> = records.iter().map(|r| r.area_ratio).collect();
    for (name, title, ys) in [("q.svg", "Q(t)", &q), ("area.svg", "A(t)", &a)] {
        let path = dir.join(name);
        std::fs::write(&path, line_plot(title, "t", &t, ys))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}
