mod common;

use std::fs::{self, File};
use std::io::BufReader;
use std::path::PathBuf;

use chrono::NaiveDate;
use common::*;
use largevol::data::{Cadence, ReturnSeries};
use largevol::events::{parse_labels, Origin};
use largevol::report::read_fits_tsv;
use largevol::synth::{gen_iid_gaussian, prices_from_returns, synthetic_calendar};
use tempfile::tempdir;

fn label_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/labels").join(name)
}

fn date(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

/// Daily prices from 1990-12-19 with a decaying burst of volatility around
/// a large move on each of `shock_dates`.
fn daily_csv(dir: &std::path::Path, shock_dates: &[NaiveDate]) -> PathBuf {
    let start = date("1990-12-19");
    let n = 4800;
    let calendar = synthetic_calendar(n + 1, Cadence::Daily, 1, start);
    let mut values = gen_iid_gaussian(n, 0.01, 5).values;
    let mut level = vec![1.0; n];
    let mut shocks = Vec::new();
    for d in shock_dates {
        // the return realized on `d` ends at the price dated `d`
        let k = calendar.iter().position(|t| t.date() == *d).expect("trading day") - 1;
        shocks.push(k);
        for (j, l) in level.iter_mut().enumerate() {
            let dist = j.abs_diff(k);
            if dist > 0 && dist <= 200 {
                *l += 3.0 * (dist as f64).powf(-0.4);
            }
        }
    }
    for (v, l) in values.iter_mut().zip(&level) {
        *v *= l;
    }
    for (i, &k) in shocks.iter().enumerate() {
        values[k] = if i % 3 == 0 { 0.25 } else { -0.25 };
    }
    let prices = prices_from_returns(&ReturnSeries::from_values(values, 1), 100.0, &calendar).unwrap();
    let path = dir.join("daily.csv");
    let body: String = std::iter::once("date,close\n".to_owned())
        .chain(prices.iter().map(|p| format!("{},{}\n", p.timestamp.format("%Y-%m-%d"), p.price)))
        .collect();
    fs::write(&path, body).unwrap();
    path
}

const OTHER_DATES: [&str; 7] =
    ["1993-02-16", "1996-04-30", "1999-06-22", "2000-01-10", "2003-11-12", "2005-06-08", "2007-02-27"];

fn shanghai_dates() -> Vec<NaiveDate> {
    let labels = parse_labels(BufReader::new(File::open(label_file("shanghai_exogenous_zeta8.csv")).unwrap())).unwrap();
    labels.iter().map(|l| l.date).collect()
}

#[test]
fn label_files_parse() {
    let sh = parse_labels(BufReader::new(File::open(label_file("shanghai_exogenous_zeta8.csv")).unwrap())).unwrap();
    assert_eq!(sh.len(), 9);
    assert!(sh.iter().all(|l| l.origin == Origin::Exogenous));
    let dax = parse_labels(BufReader::new(File::open(label_file("dax_exogenous_zeta8.csv")).unwrap())).unwrap();
    assert_eq!(dax.len(), 16);
    assert_eq!(dax[1].date, date("1987-10-19"));
    assert!(dax.iter().filter(|l| l.note.starts_with("rally")).count() == 1);
}

#[test]
fn labeled_events_split_into_origins() {
    let dir = tempdir().unwrap();
    let mut shocks = shanghai_dates();
    shocks.extend(OTHER_DATES.iter().map(|d| date(d)));
    let csv = daily_csv(dir.path(), &shocks);
    let labels = label_file("shanghai_exogenous_zeta8.csv");

    let out = dir.path().join("ev");
    let code = cli(&[
        "events", "--input", path_str(&csv), "--labels", path_str(&labels), "--thresholds", "8", "--out",
        path_str(&out),
    ]);
    assert_eq!(code, 0);
    let table = fs::read_to_string(out.join("events_z8.tsv")).unwrap();
    let rows: Vec<Vec<&str>> = table.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 16);
    assert_eq!(rows.iter().filter(|r| r[4] == "exogenous").count(), 9);
    assert_eq!(rows.iter().filter(|r| r[4] == "endogenous").count(), 7);
    // events are dated by the day the move happened
    assert!(rows.iter().any(|r| r[1].starts_with("1992-05-21") && r[4] == "exogenous"));

    let run = dir.path().join("run");
    let code = cli(&[
        "analyze", "--input", path_str(&csv), "--labels", path_str(&labels), "--thresholds", "8", "--split",
        "origin", "--fit-max", "100", "--out", path_str(&run),
    ]);
    assert!(code == 0 || code == 3, "exit {code}");
    for suffix in ["", "_endogenous", "_exogenous"] {
        assert!(run.join(format!("profile_z8{suffix}.tsv")).exists());
    }
    let fits = read_fits_tsv(BufReader::new(File::open(run.join("fits.tsv")).unwrap())).unwrap();
    let origins: Vec<&str> = fits.iter().map(|f| f.origin_filter.as_str()).collect();
    assert_eq!(origins, ["all", "all", "endogenous", "endogenous", "exogenous", "exogenous"]);
}

#[test]
fn labels_rejected_on_intraday_data() {
    let dir = tempdir().unwrap();
    let csv = synth_csv(dir.path(), "p.csv", &["--n", "20000"]);
    let labels = label_file("dax_exogenous_zeta8.csv");
    let out = dir.path().join("x");
    let code = cli(&["events", "--input", path_str(&csv), "--labels", path_str(&labels), "--out", path_str(&out)]);
    assert_eq!(code, 1);
}

#[test]
fn origin_split_needs_labels() {
    let dir = tempdir().unwrap();
    let csv = synth_csv(dir.path(), "p.csv", &["--n", "20000"]);
    let out = dir.path().join("x");
    assert_eq!(cli(&["analyze", "--input", path_str(&csv), "--split", "origin", "--out", path_str(&out)]), 1);
}
