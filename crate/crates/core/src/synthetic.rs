//! Generator for tables shaped like the steel-plant energy file.
//!
//! The columns, units and categorical vocabularies match the public file;
//! the values come from a simple seeded model (daily load cycle, reactive
//! power roughly proportional to active power, CO2 proportional to usage).
//! Useful for benchmarks and for exercising the pipeline end to end without
//! the real data. It is not a substitute for it.

use chrono::{Datelike, Duration, NaiveDate, Timelike, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::columns;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// CSV text with `rows` quarter-hour records starting 2018-01-01 00:15.
pub fn steel_like_csv(rows: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = NaiveDate::from_ymd_opt(2018, 1, 1)
        .expect("valid date")
        .and_hms_opt(0, 0, 0)
        .expect("valid time");
    let header = [
        columns::DATE,
        columns::USAGE,
        columns::LAGGING_KVARH,
        columns::LEADING_KVARH,
        columns::CO2,
        columns::LAGGING_PF,
        columns::LEADING_PF,
        columns::NSM,
        columns::WEEK_STATUS,
        columns::DAY_OF_WEEK,
        columns::LOAD_TYPE,
    ];
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..rows {
        let t = start + Duration::minutes(15 * (i as i64 + 1));
        let nsm = t.num_seconds_from_midnight();
        let hour = nsm as f64 / 3600.0;
        let weekday = t.weekday();
        let weekend = matches!(weekday, Weekday::Sat | Weekday::Sun);

        let daytime = (8.0..20.0).contains(&hour);
        let peak = (9.0..12.0).contains(&hour) || (17.0..20.0).contains(&hour);
        let mut load: u32 = match (weekend, daytime, peak) {
            (_, false, _) => 0,
            (true, true, _) => 1,
            (false, true, false) => 1,
            (false, true, true) => 2,
        };
        if rng.random::<f64>() < 0.08 {
            load = rng.random_range(0..3);
        }
        let base = [4.0, 35.0, 70.0][load as usize];
        let spread = [2.0, 14.0, 22.0][load as usize];
        let usage = (base + spread * normal(&mut rng)).max(0.0);
        let usage = (usage * 100.0).round() / 100.0;

        let lagging = (0.45 * usage + 2.0 * normal(&mut rng)).max(0.0);
        let lagging = (lagging * 100.0).round() / 100.0;
        let leading = if load == 0 && rng.random::<f64>() < 0.4 {
            ((2.0 + 3.0 * rng.random::<f64>()) * 100.0).round() / 100.0
        } else {
            0.0
        };
        let co2 = ((usage * 0.0005 + 0.002 * normal(&mut rng)).max(0.0) * 100.0).round() / 100.0;
        let pf = |reactive: f64| {
            if usage == 0.0 && reactive == 0.0 {
                100.0
            } else {
                (10000.0 * usage / (usage * usage + reactive * reactive).sqrt()).round() / 100.0
            }
        };

        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            t.format("%d/%m/%Y %H:%M"),
            usage,
            lagging,
            leading,
            co2,
            pf(lagging),
            pf(leading),
            nsm,
            if weekend { "Weekend" } else { "Weekday" },
            day_name(weekday),
            crate::dataset::LOAD_TYPES[load as usize],
        ));
    }
    out
}

fn day_name(d: Weekday) -> &'static str {
    match d {
        Weekday::Mon => "Monday",
        Weekday::Tue => "Tuesday",
        Weekday::Wed => "Wednesday",
        Weekday::Thu => "Thursday",
        Weekday::Fri => "Friday",
        Weekday::Sat => "Saturday",
        Weekday::Sun => "Sunday",
    }
}
