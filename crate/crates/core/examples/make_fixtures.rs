//! Writes the synthetic price panel used by the CLI tests.
//!
//! `cargo run -p pivrisk --example make_fixtures -- <output dir>`

use std::fs::File;
use std::path::PathBuf;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use pivrisk::market_data::write_price_csv;
use pivrisk::synthetic::simulate_gjr_piv;
use pivrisk::{CsvSchema, GjrParams, PriceSeries};

const DAYS: usize = 705;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/riskcli/fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    let p = |mu, phi, omega, alpha, beta, gamma, nu, m| GjrParams { mu, phi, omega, alpha, gamma, beta, m, nu };
    let assets = [
        ("spx", p(2.2e-4, 0.0845, 2.3e-6, 0.02, 0.88, 0.15, -0.0943, 4.5), 1_001, 2000.0),
        ("btc", p(0.0024, -0.0911, 1.3e-5, 0.2665, 0.8488, -0.2232, 0.2439, 3.2421), 1_002, 270.0),
        ("eth", p(0.0031, 0.0279, 2.6e-4, 0.2820, 0.6583, 0.0429, -0.7575, 3.7934), 1_003, 2.8),
        ("xrp", p(-0.0016, -0.0035, 2.3e-4, 0.5051, 0.4362, -0.1296, -0.3397, 2.7649), 1_004, 0.0075),
        ("ltc", p(0.0011, -0.0936, 2.1e-5, 0.1855, 0.7937, -0.1679, -0.3125, 2.8237), 1_005, 4.0),
    ];
    let start = NaiveDate::from_ymd_opt(2015, 8, 8).expect("valid date");
    let schema = CsvSchema::default();
    for (id, params, seed, first_close) in assets {
        let returns: Vec<f64> = simulate_gjr_piv(&params, DAYS - 1, 500, seed);
        let mut close = first_close;
        let mut dates = vec![start];
        let mut closes = vec![close];
        for (i, r) in returns.iter().enumerate() {
            close *= r.exp();
            dates.push(start + Duration::days(i as i64 + 1));
            closes.push(close);
        }
        if id == "spx" {
            let keep: Vec<bool> = dates.iter().map(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)).collect();
            let mut k = keep.iter();
            dates.retain(|_| *k.next().unwrap());
            let mut k = keep.iter();
            closes.retain(|_| *k.next().unwrap());
        }
        let series = PriceSeries::new(id, dates, closes)?;
        write_price_csv(&series, File::create(dir.join(format!("{id}.csv")))?, &schema)?;
        println!("{id}: {} rows", series.len());
    }
    Ok(())
}
