//! Raw review ingestion: CSV parsing, category normalization, rating-based
//! sentiment, and aggregation into a gap-free weekly series.
//!
//! Weeks are anchored at the earliest retained review date, so week `k`
//! covers `[start + 7k, start + 7k + 6]`. The anchor is carried on the
//! series so calendar dates can always be reconstructed.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One raw review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub posted_at: NaiveDate,
    pub rating: f64,
    pub category: String,
}

/// Names of the columns holding the date, rating and category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSchema {
    pub date: String,
    pub rating: String,
    pub category: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self { date: "date".into(), rating: "rating".into(), category: "category".into() }
    }
}

/// A data row that could not be turned into a [`ReviewRecord`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// 1-based line number in the source, header included.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedReviews {
    pub records: Vec<ReviewRecord>,
    pub rejects: Vec<RejectedRow>,
}

impl ParsedReviews {
    pub fn write_rejects<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["line", "reason"])?;
        for r in &self.rejects {
            w.write_record([r.line.to_string(), r.reason.clone()])?;
        }
        w.flush().map_err(|e| Error::io("<rejects>", e))?;
        Ok(())
    }
}

/// Parse an ISO `YYYY-MM-DD` date. A trailing time part (`T...` or ` ...`)
/// is tolerated and ignored.
pub fn parse_date(raw: &str) -> Option<NaiveDate> {
    let raw = raw.trim();
    let day = match raw.char_indices().nth(10) {
        Some((i, c)) if c == 'T' || c == ' ' => &raw[..i],
        Some(_) => return None,
        None => raw,
    };
    NaiveDate::parse_from_str(day, "%Y-%m-%d").ok()
}

/// Read review records from CSV. Rows with unparseable fields are collected
/// into `rejects` instead of aborting the whole read.
pub fn parse_reviews<R: Read>(source: R, schema: &ColumnSchema) -> Result<ParsedReviews> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::Headers).from_reader(source);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Schema(format!("missing required column {name:?}")))
    };
    let date_col = find(&schema.date)?;
    let rating_col = find(&schema.rating)?;
    let category_col = find(&schema.category)?;

    let mut out = ParsedReviews::default();
    for row in reader.records() {
        let row = match row {
            Ok(row) => row,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                out.rejects.push(RejectedRow { line, reason: e.to_string() });
                continue;
            }
        };
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        match record_from_row(&row, date_col, rating_col, category_col) {
            Ok(rec) => out.records.push(rec),
            Err(reason) => out.rejects.push(RejectedRow { line, reason }),
        }
    }
    Ok(out)
}

fn record_from_row(
    row: &csv::StringRecord,
    date_col: usize,
    rating_col: usize,
    category_col: usize,
) -> std::result::Result<ReviewRecord, String> {
    let field = |i: usize, what: &str| row.get(i).ok_or_else(|| format!("missing {what} field"));
    let raw_date = field(date_col, "date")?;
    let posted_at = parse_date(raw_date).ok_or_else(|| format!("unparseable date {raw_date:?}"))?;
    let raw_rating = field(rating_col, "rating")?.trim();
    let rating: f64 = raw_rating.parse().map_err(|_| format!("unparseable rating {raw_rating:?}"))?;
    if !(0.0..=5.0).contains(&rating) {
        return Err(format!("rating {rating} outside [0, 5]"));
    }
    let category = field(category_col, "category")?.to_string();
    Ok(ReviewRecord { posted_at, rating, category })
}

/// Whitespace/case normalization applied before category rules are matched.
///
/// Trims, collapses whitespace runs, drops blanks around `/`, lowercases.
pub fn normalize_text(raw: &str) -> String {
    let collapsed = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed.split('/').map(str::trim).collect::<Vec<_>>().join("/").to_lowercase()
}

/// Ordered `pattern => canonical` rewrite rules for restaurant categories.
///
/// Patterns are compared against [`normalize_text`] of the input. Every
/// canonical label also maps to itself, which makes [`CategoryMap::normalize`]
/// idempotent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryMap {
    rules: Vec<(String, String)>,
}

const DEFAULT_CATEGORY_MAP: &str = include_str!("../data/categories.map");

impl Default for CategoryMap {
    fn default() -> Self {
        Self::parse(DEFAULT_CATEGORY_MAP).expect("bundled category map is valid")
    }
}

impl CategoryMap {
    /// Build from explicit rules. Fails if a canonical label normalizes to a
    /// pattern that another rule sends elsewhere.
    pub fn new<I, P, C>(rules: I) -> Result<Self>
    where
        I: IntoIterator<Item = (P, C)>,
        P: AsRef<str>,
        C: AsRef<str>,
    {
        let explicit: Vec<(String, String)> =
            rules.into_iter().map(|(p, c)| (normalize_text(p.as_ref()), c.as_ref().trim().to_string())).collect();
        Self::from_normalized(explicit, |i| i + 1)
    }

    fn from_normalized(explicit: Vec<(String, String)>, line_of: impl Fn(usize) -> usize) -> Result<Self> {
        let mut rules: Vec<(String, String)> = Vec::new();
        for (i, (_, canonical)) in explicit.iter().enumerate() {
            let key = normalize_text(canonical);
            match rules.iter().find(|(p, _)| *p == key) {
                Some((_, c)) if c != canonical => {
                    return Err(Error::CategoryMap {
                        line: line_of(i),
                        msg: format!("canonical labels {c:?} and {canonical:?} normalize identically"),
                    })
                }
                Some(_) => {}
                None => rules.push((key, canonical.clone())),
            }
        }
        let canonical_keys = rules.len();
        for (i, (pattern, canonical)) in explicit.into_iter().enumerate() {
            match rules.iter().position(|(p, _)| *p == pattern) {
                Some(j) if j < canonical_keys && rules[j].1 != canonical => {
                    return Err(Error::CategoryMap {
                        line: line_of(i),
                        msg: format!(
                            "pattern {pattern:?} is the canonical label {:?} and cannot map to {canonical:?}",
                            rules[j].1
                        ),
                    })
                }
                // first rule for a pattern wins
                Some(_) => {}
                None => rules.push((pattern, canonical)),
            }
        }
        Ok(Self { rules })
    }

    /// Parse the plain-text map format: one `raw => canonical` rule per line,
    /// `#` starts a comment, blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut explicit = Vec::new();
        let mut lines = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (pattern, canonical) = line
                .split_once("=>")
                .ok_or_else(|| Error::CategoryMap { line: n + 1, msg: "expected `raw => canonical`".into() })?;
            let (pattern, canonical) = (normalize_text(pattern), canonical.trim().to_string());
            if pattern.is_empty() || canonical.is_empty() {
                return Err(Error::CategoryMap { line: n + 1, msg: "empty side of rule".into() });
            }
            explicit.push((pattern, canonical));
            lines.push(n + 1);
        }
        Self::from_normalized(explicit, |i| lines[i])
    }

    pub fn rules(&self) -> &[(String, String)] {
        &self.rules
    }

    /// Normalize a raw category label: whitespace/case cleanup, then the
    /// first matching rule. Unmatched labels come back in normalized form.
    pub fn normalize(&self, raw: &str) -> String {
        let key = normalize_text(raw);
        match self.rules.iter().find(|(p, _)| *p == key) {
            Some((_, canonical)) => canonical.clone(),
            None => key,
        }
    }
}

/// Free-function form of [`CategoryMap::normalize`].
pub fn normalize_category(raw: &str, map: &CategoryMap) -> String {
    map.normalize(raw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

/// Rating-derived sentiment: `>= 4` positive, `<= 2` negative, else neutral.
pub fn classify_sentiment(rating: f64) -> Result<Sentiment> {
    if !(0.0..=5.0).contains(&rating) {
        return Err(Error::Domain(format!("rating {rating} outside [0, 5]")));
    }
    Ok(if rating >= 4.0 {
        Sentiment::Positive
    } else if rating <= 2.0 {
        Sentiment::Negative
    } else {
        Sentiment::Neutral
    })
}

/// Which count column a model is fit against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    #[default]
    Positive,
    Negative,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Positive => "positive",
            Target::Negative => "negative",
        })
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" => Ok(Target::Positive),
            "negative" => Ok(Target::Negative),
            other => Err(Error::Schema(format!("unknown sentiment {other:?} (expected positive|negative)"))),
        }
    }
}

/// `ln(count + 1)` for each count.
pub fn transform_log1p(counts: &[i64]) -> Result<Vec<f64>> {
    counts
        .iter()
        .map(|&c| if c < 0 { Err(Error::Domain(format!("negative count {c}"))) } else { Ok((c as f64).ln_1p()) })
        .collect()
}

fn log1p_counts(counts: &[u64]) -> Vec<f64> {
    counts.iter().map(|&c| (c as f64).ln_1p()).collect()
}

/// Regularly spaced weekly review counts plus log1p targets.
///
/// Week indices are implicit: position `i` is week `i`, starting at
/// `start_date`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeeklySeries {
    pub start_date: NaiveDate,
    pub positive: Vec<u64>,
    pub negative: Vec<u64>,
    pub neutral: Vec<u64>,
    pub total: Vec<u64>,
    pub target_positive: Vec<f64>,
    pub target_negative: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SeriesRow {
    week_index: usize,
    week_start_date: NaiveDate,
    positive: u64,
    negative: u64,
    neutral: u64,
    total: u64,
    target_positive: f64,
    target_negative: f64,
}

impl WeeklySeries {
    /// Build from per-week sentiment counts; totals and log1p targets are derived.
    pub fn from_counts(
        start_date: NaiveDate,
        positive: Vec<u64>,
        negative: Vec<u64>,
        neutral: Vec<u64>,
    ) -> Result<Self> {
        if positive.len() != negative.len() || positive.len() != neutral.len() {
            return Err(Error::Schema("count columns differ in length".into()));
        }
        let total = positive.iter().zip(&negative).zip(&neutral).map(|((p, n), u)| p + n + u).collect();
        Ok(Self {
            start_date,
            target_positive: log1p_counts(&positive),
            target_negative: log1p_counts(&negative),
            positive,
            negative,
            neutral,
            total,
        })
    }

    pub fn len(&self) -> usize {
        self.total.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total.is_empty()
    }

    pub fn target(&self, which: Target) -> &[f64] {
        match which {
            Target::Positive => &self.target_positive,
            Target::Negative => &self.target_negative,
        }
    }

    pub fn week_start(&self, week: usize) -> NaiveDate {
        self.start_date + Duration::days(7 * week as i64)
    }

    pub fn end_date(&self) -> NaiveDate {
        self.week_start(self.len().saturating_sub(1)) + Duration::days(6)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for i in 0..self.len() {
            w.serialize(SeriesRow {
                week_index: i,
                week_start_date: self.week_start(i),
                positive: self.positive[i],
                negative: self.negative[i],
                neutral: self.neutral[i],
                total: self.total[i],
                target_positive: self.target_positive[i],
                target_negative: self.target_negative[i],
            })?;
        }
        w.flush().map_err(|e| Error::io("<series>", e))?;
        Ok(())
    }

    /// Read a series CSV written by [`WeeklySeries::write_csv`]. Target
    /// columns are taken as stored, so synthetic targets survive exactly.
    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(source);
        let mut rows = Vec::new();
        for row in reader.deserialize::<SeriesRow>() {
            rows.push(row.map_err(|e| Error::Schema(format!("series csv: {e}")))?);
        }
        let first = rows.first().ok_or_else(|| Error::Schema("series csv has no rows".into()))?;
        let start_date = first.week_start_date;
        let mut s = WeeklySeries {
            start_date,
            positive: Vec::with_capacity(rows.len()),
            negative: Vec::with_capacity(rows.len()),
            neutral: Vec::with_capacity(rows.len()),
            total: Vec::with_capacity(rows.len()),
            target_positive: Vec::with_capacity(rows.len()),
            target_negative: Vec::with_capacity(rows.len()),
        };
        for (i, row) in rows.into_iter().enumerate() {
            if row.week_index != i {
                return Err(Error::Schema(format!(
                    "week_index not contiguous: expected {i}, found {}",
                    row.week_index
                )));
            }
            if row.week_start_date != s.week_start(i) {
                return Err(Error::Schema(format!(
                    "week {i}: start date {} is not 7-day aligned",
                    row.week_start_date
                )));
            }
            if row.total != row.positive + row.negative + row.neutral {
                return Err(Error::Schema(format!("week {i}: total does not equal the sum of sentiment counts")));
            }
            if !row.target_positive.is_finite() || !row.target_negative.is_finite() {
                return Err(Error::Schema(format!("week {i}: non-finite target")));
            }
            s.positive.push(row.positive);
            s.negative.push(row.negative);
            s.neutral.push(row.neutral);
            s.total.push(row.total);
            s.target_positive.push(row.target_positive);
            s.target_negative.push(row.target_negative);
        }
        Ok(s)
    }
}

/// Group reviews into consecutive 7-day buckets.
///
/// Keeps records whose normalized category equals the normalized `category`
/// (`None` keeps every category) and whose year is at least `min_year`.
/// Week 0 starts at the earliest retained date; empty weeks are kept.
pub fn aggregate_weekly(
    records: &[ReviewRecord],
    category: Option<&str>,
    min_year: i32,
    map: &CategoryMap,
) -> Result<WeeklySeries> {
    let wanted = category.map(|c| map.normalize(c));
    let kept: Vec<&ReviewRecord> = records
        .iter()
        .filter(|r| r.posted_at.year() >= min_year)
        .filter(|r| wanted.as_ref().is_none_or(|w| map.normalize(&r.category) == *w))
        .collect();

    let empty = || Error::EmptySeries { category: category.unwrap_or("*").to_string(), min_year };
    let start = kept.iter().map(|r| r.posted_at).min().ok_or_else(empty)?;
    let end = kept.iter().map(|r| r.posted_at).max().ok_or_else(empty)?;
    let weeks = ((end - start).num_days() / 7) as usize + 1;

    let mut positive = vec![0u64; weeks];
    let mut negative = vec![0u64; weeks];
    let mut neutral = vec![0u64; weeks];
    for r in kept {
        let week = ((r.posted_at - start).num_days() / 7) as usize;
        match classify_sentiment(r.rating)? {
            Sentiment::Positive => positive[week] += 1,
            Sentiment::Negative => negative[week] += 1,
            Sentiment::Neutral => neutral[week] += 1,
        }
    }
    WeeklySeries::from_counts(start, positive, negative, neutral)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn rec(date: NaiveDate, rating: f64, cat: &str) -> ReviewRecord {
        ReviewRecord { posted_at: date, rating, category: cat.into() }
    }

    #[test]
    fn parses_well_formed_row() {
        let csv = "date,rating,category\n2020-03-16,4.5,Casual Dining\n";
        let out = parse_reviews(csv.as_bytes(), &ColumnSchema::default()).unwrap();
        assert_eq!(out.records, vec![rec(d("2020-03-16"), 4.5, "Casual Dining")]);
        assert!(out.rejects.is_empty());
    }

    #[test]
    fn header_only_is_empty() {
        let out = parse_reviews("date,rating,category\n".as_bytes(), &ColumnSchema::default()).unwrap();
        assert!(out.records.is_empty());
        assert!(out.rejects.is_empty());
    }

    #[test]
    fn bad_rating_is_rejected_not_dropped() {
        let csv = "date,rating,category\n2020-03-16,abc,Bar\n2020-03-17,3,Bar\n2020-03-18,7,Bar\nnot-a-date,3,Bar\n";
        let out = parse_reviews(csv.as_bytes(), &ColumnSchema::default()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.rejects.len(), 3);
        assert_eq!(out.rejects[0].line, 2);
        assert!(out.rejects[0].reason.contains("abc"));
        assert_eq!(out.rejects[2].line, 5);
    }

    #[test]
    fn missing_column_is_schema_error() {
        let schema = ColumnSchema { rating: "stars".into(), ..Default::default() };
        let err = parse_reviews("date,rating,category\n".as_bytes(), &schema).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn custom_columns_and_datetimes() {
        let schema = ColumnSchema { date: "when".into(), rating: "stars".into(), category: "type".into() };
        let csv = "type,stars,when,text\nBar,2,2019-10-28T18:30:00,meh\n";
        let out = parse_reviews(csv.as_bytes(), &schema).unwrap();
        assert_eq!(out.records, vec![rec(d("2019-10-28"), 2.0, "Bar")]);
    }

    #[test]
    fn category_merges() {
        let map = CategoryMap::default();
        assert_eq!(map.normalize("Casual Dining "), "Casual Dining");
        assert_eq!(map.normalize("CD"), "Casual Dining");
        assert_eq!(map.normalize("Casual Dining / Microbrewery"), "Microbrewery/CD");
        assert_eq!(map.normalize("Casual Dining/ Bar"), "Bar/CD");
        assert_eq!(map.normalize("Bar /CD"), "Bar/CD");
        assert_eq!(map.normalize("  Food   Court "), "food court");
    }

    #[test]
    fn category_map_rejects_conflicting_canonical() {
        let err = CategoryMap::parse("a => B\nb => C\n").unwrap_err();
        assert!(matches!(err, Error::CategoryMap { line: 2, .. }));
        assert!(CategoryMap::parse("no arrow here").is_err());
    }

    #[test]
    fn sentiment_thresholds() {
        assert_eq!(classify_sentiment(4.0).unwrap(), Sentiment::Positive);
        assert_eq!(classify_sentiment(5.0).unwrap(), Sentiment::Positive);
        assert_eq!(classify_sentiment(2.0).unwrap(), Sentiment::Negative);
        assert_eq!(classify_sentiment(0.0).unwrap(), Sentiment::Negative);
        assert_eq!(classify_sentiment(3.0).unwrap(), Sentiment::Neutral);
        assert_eq!(classify_sentiment(3.5).unwrap(), Sentiment::Neutral);
        assert_eq!(classify_sentiment(2.5).unwrap(), Sentiment::Neutral);
        assert_eq!(classify_sentiment(3.999).unwrap(), Sentiment::Neutral);
        assert!(classify_sentiment(5.5).is_err());
        assert!(classify_sentiment(-0.1).is_err());
        assert!(classify_sentiment(f64::NAN).is_err());
    }

    #[test]
    fn weekly_bucket_boundaries() {
        let s = d("2020-01-01");
        let recs: Vec<_> = [0, 3, 6, 7].iter().map(|&k| rec(s + Duration::days(k), 5.0, "Bar")).collect();
        let series = aggregate_weekly(&recs, None, 2013, &CategoryMap::default()).unwrap();
        assert_eq!(series.positive, vec![3, 1]);
        assert_eq!(series.start_date, s);
    }

    #[test]
    fn empty_weeks_are_kept() {
        let s = d("2020-01-01");
        let recs = vec![rec(s, 1.0, "Bar"), rec(s + Duration::days(15), 3.0, "Bar")];
        let series = aggregate_weekly(&recs, Some("bar"), 2013, &CategoryMap::default()).unwrap();
        assert_eq!(series.len(), 3);
        assert_eq!(series.total, vec![1, 0, 1]);
        assert_eq!(series.negative, vec![1, 0, 0]);
        assert_eq!(series.neutral, vec![0, 0, 1]);
        assert_eq!(series.target_positive, vec![0.0; 3]);
    }

    #[test]
    fn min_year_filter() {
        let recs =
            vec![rec(d("2011-05-01"), 5.0, "Bar"), rec(d("2014-05-01"), 5.0, "Bar"), rec(d("2014-05-09"), 1.0, "Bar")];
        let series = aggregate_weekly(&recs, None, 2013, &CategoryMap::default()).unwrap();
        assert_eq!(series.start_date, d("2014-05-01"));
        assert_eq!(series.total.iter().sum::<u64>(), 2);
    }

    #[test]
    fn category_filter_uses_map() {
        let s = d("2020-01-01");
        let recs =
            vec![rec(s, 5.0, "CD"), rec(s, 5.0, "Casual Dining "), rec(s, 5.0, "casual dining"), rec(s, 5.0, "Bar")];
        let series = aggregate_weekly(&recs, Some("Casual Dining"), 2013, &CategoryMap::default()).unwrap();
        assert_eq!(series.positive, vec![3]);
    }

    #[test]
    fn nothing_survives_filter() {
        let recs = vec![rec(d("2011-05-01"), 5.0, "Bar")];
        let err = aggregate_weekly(&recs, None, 2013, &CategoryMap::default()).unwrap_err();
        assert!(matches!(err, Error::EmptySeries { .. }));
        assert!(aggregate_weekly(&[], None, 2013, &CategoryMap::default()).is_err());
    }

    #[test]
    fn log1p_values() {
        let out = transform_log1p(&[0, 9]).unwrap();
        assert_eq!(out[0], 0.0);
        assert!((out[1] - std::f64::consts::LN_10).abs() < 1e-15);
        assert!(transform_log1p(&[3, -1]).is_err());
    }

    #[test]
    fn series_csv_round_trip_keeps_targets() {
        let mut s = WeeklySeries::from_counts(d("2020-01-06"), vec![1, 0, 4], vec![0, 2, 0], vec![1, 1, 1]).unwrap();
        s.target_positive = vec![-0.25, 0.1234567890123, 3.0];
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "week_index,week_start_date,positive,negative,neutral,total,target_positive,target_negative\n"
        ));
        assert!(text.contains("\n1,2020-01-13,0,2,1,3,"));
        assert_eq!(WeeklySeries::read_csv(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn series_csv_rejects_gaps() {
        let csv = "week_index,week_start_date,positive,negative,neutral,total,target_positive,target_negative\n\
                   0,2020-01-06,1,0,0,1,0.6931471805599453,0\n\
                   2,2020-01-20,1,0,0,1,0.6931471805599453,0\n";
        assert!(matches!(WeeklySeries::read_csv(csv.as_bytes()), Err(Error::Schema(_))));
    }
}
