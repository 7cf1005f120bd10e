//! Minimal SVG figures in plane coordinates. Output depends only on the
//! drawn data: no timestamps, fixed number formatting.

use std::fmt::Write;

use buffdyn_core::Complex;

const WIDTH: f64 = 800.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub name: String,
    pub title: String,
    lo: Complex,
    hi: Complex,
    body: Vec<String>,
    notes: Vec<String>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

impl Figure {
    /// A figure showing the rectangle with corners `lo` and `hi`.
    pub fn new(name: &str, title: &str, lo: Complex, hi: Complex) -> Self {
        assert!(hi.re > lo.re && hi.im > lo.im, "empty view");
        Figure { name: name.into(), title: title.into(), lo, hi, body: Vec::new(), notes: Vec::new() }
    }

    /// Square window of half-width `r` about `center`.
    pub fn square(name: &str, title: &str, center: Complex, r: f64) -> Self {
        let d = Complex::new(r, r);
        Figure::new(name, title, center - d, center + d)
    }

    /// Window around every finite point, padded by 8% and at least `min` wide.
    pub fn fitted(name: &str, title: &str, points: impl IntoIterator<Item = Complex>, min: f64) -> Self {
        let (mut lo, mut hi) = (Complex::new(f64::INFINITY, f64::INFINITY), Complex::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for z in points.into_iter().filter(|z| z.re.is_finite() && z.im.is_finite()) {
            lo = Complex::new(lo.re.min(z.re), lo.im.min(z.im));
            hi = Complex::new(hi.re.max(z.re), hi.im.max(z.im));
        }
        if !lo.re.is_finite() {
            return Figure::square(name, title, Complex::new(0.0, 0.0), min);
        }
        let mid = (lo + hi) * 0.5;
        let half = ((hi.re - lo.re).max(hi.im - lo.im) * 0.54).max(min * 0.5);
        Figure::square(name, title, mid, half)
    }

    fn scale(&self) -> f64 {
        WIDTH / (self.hi.re - self.lo.re)
    }

    fn height(&self) -> f64 {
        (self.hi.im - self.lo.im) * self.scale()
    }

    fn px(&self, z: Complex) -> (f64, f64) {
        let s = self.scale();
        ((z.re - self.lo.re) * s, (self.hi.im - z.im) * s)
    }

    fn visible(&self, z: Complex) -> bool {
        let mx = 0.05 * (self.hi.re - self.lo.re);
        let my = 0.05 * (self.hi.im - self.lo.im);
        z.re >= self.lo.re - mx && z.re <= self.hi.re + mx && z.im >= self.lo.im - my && z.im <= self.hi.im + my
    }

    /// Draw the parts of a polyline that fall inside the window.
    pub fn polyline(&mut self, pts: &[Complex], stroke: &str, width: f64) {
        let mut run: Vec<(f64, f64)> = Vec::new();
        let flush = |run: &mut Vec<(f64, f64)>, body: &mut Vec<String>| {
            if run.len() >= 2 {
                let mut d = String::new();
                for (k, (x, y)) in run.iter().enumerate() {
                    let _ = write!(d, "{}{x:.2} {y:.2}", if k == 0 { "M" } else { " L" });
                }
                body.push(format!(r#"<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#));
            }
            run.clear();
        };
        for (k, &z) in pts.iter().enumerate() {
            if z.re.is_finite() && z.im.is_finite() && self.visible(z) {
                let p = self.px(z);
                // drop sub-pixel steps, keeping the final vertex
                let close = run.last().is_some_and(|q| (p.0 - q.0).hypot(p.1 - q.1) < 0.5);
                if !close || k + 1 == pts.len() {
                    run.push(p);
                }
            } else {
                flush(&mut run, &mut self.body);
            }
        }
        flush(&mut run, &mut self.body);
    }

    pub fn dot(&mut self, z: Complex, radius_px: f64, fill: &str) {
        if !self.visible(z) {
            return;
        }
        let (x, y) = self.px(z);
        self.body.push(format!(r#"<circle cx="{x:.2}" cy="{y:.2}" r="{radius_px}" fill="{fill}"/>"#));
    }

    pub fn circle(&mut self, center: Complex, radius: f64, stroke: &str) {
        let (x, y) = self.px(center);
        let r = radius * self.scale();
        self.body.push(format!(r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="none" stroke="{stroke}" stroke-dasharray="4 3"/>"#));
    }

    pub fn label(&mut self, z: Complex, text: &str) {
        if !self.visible(z) {
            return;
        }
        let (x, y) = self.px(z);
        self.body.push(format!(r#"<text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#, x + 5.0, y - 5.0, escape(text)));
    }

    /// A line of text under the title.
    pub fn note(&mut self, text: &str) {
        self.notes.push(text.into());
    }

    pub fn render(&self) -> String {
        let h = self.height();
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{h:.0}" viewBox="0 0 {WIDTH} {h:.2}" font-family="sans-serif">"#
        );
        let _ = writeln!(s, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        // axes through 0 when visible
        let (ox, oy) = self.px(Complex::new(0.0, 0.0));
        if (0.0..=WIDTH).contains(&ox) {
            let _ = writeln!(s, r##"<line x1="{ox:.2}" y1="0" x2="{ox:.2}" y2="{h:.2}" stroke="#ddd"/>"##);
        }
        if (0.0..=h).contains(&oy) {
            let _ = writeln!(s, r##"<line x1="0" y1="{oy:.2}" x2="{WIDTH}" y2="{oy:.2}" stroke="#ddd"/>"##);
        }
        for el in &self.body {
            s.push_str(el);
            s.push('\n');
        }
        let _ = writeln!(s, r#"<text x="10" y="20" font-size="14">{}</text>"#, escape(&self.title));
        for (k, n) in self.notes.iter().enumerate() {
            let _ = writeln!(s, r#"<text x="10" y="{}" font-size="12">{}</text>"#, 38 + 16 * k, escape(n));
        }
        let _ = writeln!(
            s,
            r#"<text x="10" y="{:.0}" font-size="11" fill="gray">re [{:.6}, {:.6}], im [{:.6}, {:.6}]</text>"#,
            h - 8.0,
            self.lo.re,
            self.hi.re,
            self.lo.im,
            self.hi.im
        );
        s.push_str("</svg>\n");
        s
    }
}
