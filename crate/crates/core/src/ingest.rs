//! Turning geolocated events into per-period node counts.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use chrono::{DateTime, Datelike, FixedOffset, NaiveDate, NaiveDateTime, NaiveTime, Weekday};
use chrono_tz::Tz;
use rayon::prelude::*;

use crate::design::SignalSet;
use crate::error::{Error, Result};
use crate::graph::{LatLon, WeightedGraph};

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Events farther than this outside the graph's bounding box are dropped.
pub const BBOX_PADDING_KM: f64 = 1.0;

/// Great-circle distance in kilometres.
pub fn haversine_km(a: LatLon, b: LatLon) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Event time as written in the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventTime {
    /// Wall-clock time with no offset; read as local time in the target zone.
    Local(NaiveDateTime),
    /// Absolute instant; converted into the target zone.
    Zoned(DateTime<FixedOffset>),
}

impl EventTime {
    pub fn local_in(&self, tz: Tz) -> NaiveDateTime {
        match self {
            EventTime::Local(t) => *t,
            EventTime::Zoned(t) => t.with_timezone(&tz).naive_local(),
        }
    }
}

impl FromStr for EventTime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(t) = DateTime::parse_from_rfc3339(s) {
            return Ok(EventTime::Zoned(t));
        }
        for fmt in ["%Y-%m-%d %H:%M:%S%.f%:z", "%Y-%m-%d %H:%M:%S%.f%z"] {
            if let Ok(t) = DateTime::parse_from_str(s, fmt) {
                return Ok(EventTime::Zoned(t));
            }
        }
        for fmt in [
            "%Y-%m-%dT%H:%M:%S%.f",
            "%Y-%m-%d %H:%M:%S%.f",
            "%Y-%m-%dT%H:%M",
            "%Y-%m-%d %H:%M",
        ] {
            if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
                return Ok(EventTime::Local(t));
            }
        }
        Err(Error::InvalidTimestamp(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub position: LatLon,
    pub time: EventTime,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    pub events: Vec<Event>,
}

impl EventLog {
    pub fn new(events: Vec<Event>) -> Self {
        EventLog { events }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Uniform lat/lon grid over the node coordinates answering exact
/// nearest-node queries under haversine distance.
#[derive(Debug, Clone)]
pub struct NearestNodeIndex {
    coords: Vec<LatLon>,
    min_lat: f64,
    min_lon: f64,
    cell_lat: f64,
    cell_lon: f64,
    rows: usize,
    cols: usize,
    cells: Vec<Vec<usize>>,
    /// Largest |lat| over nodes and admissible queries, for distance lower bounds.
    max_abs_lat: f64,
    pad_lat: f64,
    pad_lon: f64,
}

impl NearestNodeIndex {
    pub fn new(coords: Vec<LatLon>) -> Self {
        assert!(!coords.is_empty());
        let min_lat = coords.iter().map(|c| c.lat).fold(f64::INFINITY, f64::min);
        let max_lat = coords.iter().map(|c| c.lat).fold(f64::NEG_INFINITY, f64::max);
        let min_lon = coords.iter().map(|c| c.lon).fold(f64::INFINITY, f64::min);
        let max_lon = coords.iter().map(|c| c.lon).fold(f64::NEG_INFINITY, f64::max);

        let km_per_deg = EARTH_RADIUS_KM.to_radians();
        let pad_lat = BBOX_PADDING_KM / km_per_deg;
        let max_abs_lat = (max_lat.abs().max(min_lat.abs()) + pad_lat).min(90.0);
        let pad_lon = (pad_lat / max_abs_lat.to_radians().cos().max(1e-6)).min(360.0);

        // About two nodes per cell.
        let n = coords.len() as f64;
        let span_lat = (max_lat - min_lat).max(1e-9);
        let span_lon = (max_lon - min_lon).max(1e-9);
        let side = ((span_lat * span_lon) / (n / 2.0)).sqrt().max(1e-9);
        let rows = ((span_lat / side).ceil() as usize).clamp(1, 4096);
        let cols = ((span_lon / side).ceil() as usize).clamp(1, 4096);
        let cell_lat = span_lat / rows as f64;
        let cell_lon = span_lon / cols as f64;

        let mut index = NearestNodeIndex {
            coords,
            min_lat,
            min_lon,
            cell_lat,
            cell_lon,
            rows,
            cols,
            cells: vec![Vec::new(); rows * cols],
            max_abs_lat,
            pad_lat,
            pad_lon,
        };
        for i in 0..index.coords.len() {
            let (r, c) = index.cell_of(index.coords[i]);
            index.cells[r * cols + c].push(i);
        }
        index
    }

    fn cell_of(&self, p: LatLon) -> (usize, usize) {
        let r = ((p.lat - self.min_lat) / self.cell_lat).floor();
        let c = ((p.lon - self.min_lon) / self.cell_lon).floor();
        (
            (r.max(0.0) as usize).min(self.rows - 1),
            (c.max(0.0) as usize).min(self.cols - 1),
        )
    }

    /// Whether `p` lies inside the padded bounding box of the nodes.
    pub fn covers(&self, p: LatLon) -> bool {
        let max_lat = self.min_lat + self.cell_lat * self.rows as f64;
        let max_lon = self.min_lon + self.cell_lon * self.cols as f64;
        p.lat >= self.min_lat - self.pad_lat
            && p.lat <= max_lat + self.pad_lat
            && p.lon >= self.min_lon - self.pad_lon
            && p.lon <= max_lon + self.pad_lon
    }

    /// Lower bound on the distance to any point whose grid cell is more than
    /// `ring` cells away from the query's cell.
    fn ring_lower_bound(&self, ring: usize) -> f64 {
        let r = ring as f64;
        let by_lat = EARTH_RADIUS_KM * (r * self.cell_lat).to_radians();
        let dl = (r * self.cell_lon).to_radians().min(std::f64::consts::PI);
        let by_lon = 2.0
            * EARTH_RADIUS_KM
            * (self.max_abs_lat.to_radians().cos() * (dl / 2.0).sin())
                .clamp(0.0, 1.0)
                .asin();
        by_lat.min(by_lon) * (1.0 - 1e-9)
    }

    /// Nearest node to `p`; ties go to the smaller node index.
    pub fn nearest(&self, p: LatLon) -> usize {
        let (r0, c0) = self.cell_of(p);
        let mut best: Option<(f64, usize)> = None;
        let max_ring = self.rows.max(self.cols);
        for ring in 0..=max_ring {
            let (r0, c0, ring_i) = (r0 as isize, c0 as isize, ring as isize);
            for r in (r0 - ring_i)..=(r0 + ring_i) {
                if r < 0 || r >= self.rows as isize {
                    continue;
                }
                let on_edge_row = r == r0 - ring_i || r == r0 + ring_i;
                let step = if on_edge_row { 1 } else { (2 * ring_i).max(1) };
                let mut c = c0 - ring_i;
                while c <= c0 + ring_i {
                    if c >= 0 && c < self.cols as isize {
                        for &i in &self.cells[r as usize * self.cols + c as usize] {
                            let d = haversine_km(p, self.coords[i]);
                            if best.is_none_or(|(bd, bi)| d < bd || (d == bd && i < bi)) {
                                best = Some((d, i));
                            }
                        }
                    }
                    c += step;
                }
            }
            if let Some((bd, _)) = best {
                if bd < self.ring_lower_bound(ring) {
                    break;
                }
            }
        }
        best.expect("index is non-empty").1
    }
}

/// Nearest-node assignment of each event; `None` for events outside the padded bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapResult {
    pub nodes: Vec<Option<usize>>,
    pub dropped: usize,
}

/// Assigns every event to its nearest graph node by haversine distance.
pub fn snap_events(graph: &WeightedGraph, log: &EventLog) -> Result<SnapResult> {
    let index = NearestNodeIndex::new(graph.coords()?);
    let nodes: Vec<Option<usize>> = log
        .events
        .par_iter()
        .map(|e| index.covers(e.position).then(|| index.nearest(e.position)))
        .collect();
    let dropped = nodes.iter().filter(|n| n.is_none()).count();
    Ok(SnapResult { nodes, dropped })
}

/// Selects events by weekday and local time of day, grouped by calendar day.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodFilter {
    pub weekdays: [bool; 7],
    /// `[start, end)`; wraps past midnight if `end <= start`.
    pub window: Option<(NaiveTime, NaiveTime)>,
    pub timezone: Tz,
    /// Inclusive date range. When set, every admissible day in it is a period,
    /// even if no event falls on it.
    pub dates: Option<(NaiveDate, NaiveDate)>,
    pub exclude: BTreeSet<NaiveDate>,
}

impl Default for PeriodFilter {
    fn default() -> Self {
        PeriodFilter {
            weekdays: [true; 7],
            window: None,
            timezone: Tz::UTC,
            dates: None,
            exclude: BTreeSet::new(),
        }
    }
}

impl PeriodFilter {
    /// Parses masks like `mon-fri`, `sat,sun`, `all`.
    pub fn parse_weekdays(spec: &str) -> Result<[bool; 7]> {
        let bad = || Error::Config(format!("invalid weekday mask {spec:?}"));
        if spec.eq_ignore_ascii_case("all") {
            return Ok([true; 7]);
        }
        let mut mask = [false; 7];
        for part in spec.split(',') {
            let part = part.trim();
            match part.split_once('-') {
                Some((a, b)) => {
                    let a = a.trim().parse::<Weekday>().map_err(|_| bad())?;
                    let b = b.trim().parse::<Weekday>().map_err(|_| bad())?;
                    let mut d = a;
                    loop {
                        mask[d.num_days_from_monday() as usize] = true;
                        if d == b {
                            break;
                        }
                        d = d.succ();
                    }
                }
                None => {
                    let d = part.parse::<Weekday>().map_err(|_| bad())?;
                    mask[d.num_days_from_monday() as usize] = true;
                }
            }
        }
        Ok(mask)
    }

    /// Parses `HH:MM-HH:MM`.
    pub fn parse_window(spec: &str) -> Result<(NaiveTime, NaiveTime)> {
        let bad = || Error::Config(format!("invalid time window {spec:?} (expected HH:MM-HH:MM)"));
        let (a, b) = spec.split_once('-').ok_or_else(bad)?;
        let a = NaiveTime::parse_from_str(a.trim(), "%H:%M").map_err(|_| bad())?;
        let b = NaiveTime::parse_from_str(b.trim(), "%H:%M").map_err(|_| bad())?;
        Ok((a, b))
    }

    fn day_allowed(&self, d: NaiveDate) -> bool {
        self.weekdays[d.weekday().num_days_from_monday() as usize]
            && !self.exclude.contains(&d)
            && self.dates.is_none_or(|(lo, hi)| lo <= d && d <= hi)
    }

    fn time_allowed(&self, t: NaiveTime) -> bool {
        match self.window {
            None => true,
            Some((start, end)) if start < end => start <= t && t < end,
            Some((start, end)) => t >= start || t < end,
        }
    }

    /// Period (local calendar day) of an event, if the event passes the filter.
    pub fn period_of(&self, time: &EventTime) -> Option<NaiveDate> {
        let local = time.local_in(self.timezone);
        (self.day_allowed(local.date()) && self.time_allowed(local.time())).then(|| local.date())
    }
}

/// Per-period node counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    pub signals: SignalSet,
    pub periods: Vec<NaiveDate>,
    pub events_per_period: Vec<usize>,
    /// Periods that matched no event; their function is identically zero.
    pub empty_periods: Vec<NaiveDate>,
}

/// Counts snapped events per node and period.
pub fn aggregate_functions(
    node_count: usize,
    snapped: &SnapResult,
    log: &EventLog,
    filter: &PeriodFilter,
) -> Result<Aggregation> {
    if snapped.nodes.len() != log.len() {
        return Err(Error::DimensionMismatch {
            expected: log.len(),
            found: snapped.nodes.len(),
        });
    }
    let mut counts: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    if let Some((lo, hi)) = filter.dates {
        for d in lo.iter_days().take_while(|d| *d <= hi) {
            if filter.day_allowed(d) {
                counts.insert(d, vec![0.0; node_count]);
            }
        }
    }
    let mut totals: BTreeMap<NaiveDate, usize> = BTreeMap::new();
    for (event, node) in log.events.iter().zip(&snapped.nodes) {
        let Some(node) = *node else { continue };
        let Some(day) = filter.period_of(&event.time) else {
            continue;
        };
        counts.entry(day).or_insert_with(|| vec![0.0; node_count])[node] += 1.0;
        *totals.entry(day).or_default() += 1;
    }
    if counts.is_empty() {
        return Err(Error::EmptySignalSet);
    }
    let periods: Vec<NaiveDate> = counts.keys().copied().collect();
    let events_per_period: Vec<usize> = periods.iter().map(|d| totals.get(d).copied().unwrap_or(0)).collect();
    let empty_periods = periods
        .iter()
        .zip(&events_per_period)
        .filter(|(_, &c)| c == 0)
        .map(|(d, _)| *d)
        .collect();
    let signals = SignalSet::new(counts.into_values().collect(), node_count)?;
    Ok(Aggregation {
        signals,
        periods,
        events_per_period,
        empty_periods,
    })
}
