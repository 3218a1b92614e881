//! Synthetic stand-in for the hotel service-recommendation data: six
//! customer consumption-habit attributes (sensitive), six hotel attributes,
//! and a three-way room-service label.
//!
//! The label follows a fixed rule over the hotel attributes. With
//! probability `noise * h` the service is bumped up one tier and with
//! probability `noise * (1 - h)` bumped down one tier, where `h` is the
//! customer's mean normalized habit level, so habit-blind and habit-aware
//! models disagree on otherwise identical bookings.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::{Dataset, Record};
use super::schema::{ColumnSpec, SchemaConfig};
use crate::error::Result;

/// Noise level used by [`synth_ctrip`].
pub const DEFAULT_HABIT_NOISE: f64 = 0.35;

const HABITS: [(&str, usize); 6] = [
    ("order_confirm_time", 4),
    ("advance_booking_days", 5),
    ("avg_star_level", 5),
    ("avg_class_level", 4),
    ("avg_recommend_level", 4),
    ("avg_stay_days", 4),
];

pub const HOTEL_COLUMNS: [&str; 6] = [
    "order_date",
    "hotel_id",
    "room_type",
    "room_id",
    "star_level",
    "room_price",
];

pub fn ctrip_schema() -> SchemaConfig {
    let mut cols: Vec<ColumnSpec> = HOTEL_COLUMNS
        .iter()
        .map(|c| ColumnSpec::numeric(c))
        .collect();
    for (name, arity) in HABITS {
        let hi = arity as i64 - 1;
        cols.push(ColumnSpec::sensitive_range(name, 0, hi, hi));
    }
    cols.push(ColumnSpec::label(
        "service",
        &["basic", "standard", "premium"],
        "premium",
    ));
    SchemaConfig::new("ctrip-synthetic", cols).expect("static schema is valid")
}

/// Service tier implied by the hotel attributes alone.
fn planted_service(x: &[f64]) -> usize {
    let (room_type, star, price) = (x[2], x[4], x[5]);
    let score = 0.45 * (star - 1.0) / 4.0 + 0.4 * (price - 100.0) / 1400.0 + 0.05 * room_type;
    if score < 0.3 {
        0
    } else if score < 0.55 {
        1
    } else {
        2
    }
}

pub fn synth_ctrip(n: usize, seed: u64) -> Result<Dataset> {
    synth_ctrip_with_noise(n, seed, DEFAULT_HABIT_NOISE)
}

pub fn synth_ctrip_with_noise(n: usize, seed: u64, noise: f64) -> Result<Dataset> {
    let schema = Arc::new(ctrip_schema());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n);
    for _ in 0..n {
        let habit_idx: Vec<usize> = HABITS.iter().map(|&(_, k)| rng.gen_range(0..k)).collect();
        let a: Vec<f64> = schema
            .sensitive()
            .iter()
            .zip(&habit_idx)
            .map(|(d, &i)| d.encode(i))
            .collect();
        let h = a.iter().sum::<f64>() / a.len() as f64;

        // customers with a high star-level habit lean towards better hotels
        let star_pref = a[2];
        let star = (1.0 + 4.0 * (0.6 * rng.gen::<f64>() + 0.4 * star_pref))
            .round()
            .clamp(1.0, 5.0);
        let price = (100.0 + 1400.0 * (0.5 * rng.gen::<f64>() + 0.5 * (star - 1.0) / 4.0)).round();
        let x = vec![
            rng.gen_range(1..=365) as f64,
            rng.gen_range(1..=200) as f64,
            rng.gen_range(0..4) as f64,
            rng.gen_range(1..=1000) as f64,
            star,
            price,
        ];

        let mut y = planted_service(&x);
        let u: f64 = rng.gen();
        if u < noise * h {
            y = (y + 1).min(2);
        } else if u < noise {
            y = y.saturating_sub(1);
        }
        records.push(Record { x, a, y });
    }
    Dataset::new(schema, records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_shape() {
        let s = ctrip_schema();
        assert_eq!(s.num_sensitive(), 6);
        assert_eq!(s.num_features(), 6);
        assert_eq!(s.label_classes().len(), 3);
    }

    #[test]
    fn deterministic_under_seed() {
        let a = synth_ctrip(1000, 0).unwrap();
        let b = synth_ctrip(1000, 0).unwrap();
        assert_eq!(a.records, b.records);
        let c = synth_ctrip(1000, 1).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn noise_is_habit_correlated() {
        let d = synth_ctrip_with_noise(20_000, 3, 0.5).unwrap();
        let mut up = [0usize; 2];
        let mut count = [0usize; 2];
        for r in &d.records {
            let h = r.a.iter().sum::<f64>() / 6.0;
            if (0.35..=0.65).contains(&h) {
                continue;
            }
            let g = usize::from(h > 0.65);
            count[g] += 1;
            if r.y > planted_service(&r.x) {
                up[g] += 1;
            }
        }
        let rate = |g: usize| up[g] as f64 / count[g] as f64;
        assert!(rate(1) > rate(0) + 0.05, "{} vs {}", rate(1), rate(0));
    }
}
