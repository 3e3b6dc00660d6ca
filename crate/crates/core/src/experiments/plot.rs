use super::experiment::ResultRow;
use crate::error::{Error, Result};

/// Which row fields become the series, x and y columns of the plot data.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotAxes {
    pub series: String,
    pub x: String,
    pub y: String,
    /// Constant written to an extra `asymptote` column, e.g. a limiting ratio.
    pub asymptote: Option<f64>,
}

impl PlotAxes {
    pub fn new(series: &str, x: &str, y: &str) -> Self {
        PlotAxes {
            series: series.into(),
            x: x.into(),
            y: y.into(),
            asymptote: None,
        }
    }

    pub fn with_asymptote(mut self, a: f64) -> Self {
        self.asymptote = Some(a);
        self
    }
}

/// Long-format CSV `series,x,y[,asymptote]`, one line per row in input order.
pub fn emit_plotdata(rows: &[ResultRow], axes: &PlotAxes) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["series", "x", "y"];
    if axes.asymptote.is_some() {
        header.push("asymptote");
    }
    w.write_record(&header)?;
    for r in rows {
        let get = |name: &str| {
            r.field(name)
                .ok_or_else(|| Error::parse(format!("row has no field {name:?}")))
        };
        let mut rec = vec![get(&axes.series)?, get(&axes.x)?, get(&axes.y)?];
        if let Some(a) = axes.asymptote {
            rec.push(format!("{a:.9}"));
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}
