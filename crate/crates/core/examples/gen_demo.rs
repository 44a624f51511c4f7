//! Writes the synthetic demo dataset shipped in `data/demo_dataset.csv`.
//!
//!     cargo run --example gen_demo > crates/core/data/demo_dataset.csv
//!
//! Guesses come from a simple observer model: each observed symbol is
//! recalled with a group-specific probability, otherwise replaced by a random
//! one, and the tail of the password is sometimes missed entirely.

use std::io;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use surfbench::scheme::{PasswordSeq, SymbolId};
use surfbench::{ObservationRecord, ObserverType, Scheme};

struct Group {
    scheme: &'static str,
    observer: ObserverType,
    n: usize,
    length: usize,
    recall: f64,
    max_missed: usize,
    median_login_s: f64,
}

#[rustfmt::skip]
const GROUPS: [Group; 8] = [
    Group { scheme: "textual", observer: ObserverType::Active, n: 35, length: 11, recall: 0.55, max_missed: 4, median_login_s: 20.0 },
    Group { scheme: "textual", observer: ObserverType::Passive, n: 35, length: 11, recall: 0.35, max_missed: 6, median_login_s: 24.0 },
    Group { scheme: "gcps", observer: ObserverType::Active, n: 34, length: 7, recall: 0.65, max_missed: 2, median_login_s: 58.0 },
    Group { scheme: "gcps", observer: ObserverType::Passive, n: 34, length: 7, recall: 0.5, max_missed: 3, median_login_s: 65.0 },
    Group { scheme: "list-keyboard", observer: ObserverType::Active, n: 34, length: 21, recall: 0.6, max_missed: 6, median_login_s: 75.0 },
    Group { scheme: "list-keyboard", observer: ObserverType::Passive, n: 34, length: 21, recall: 0.5, max_missed: 9, median_login_s: 105.0 },
    Group { scheme: "list-mouse", observer: ObserverType::Active, n: 34, length: 21, recall: 0.7, max_missed: 5, median_login_s: 90.0 },
    Group { scheme: "list-mouse", observer: ObserverType::Passive, n: 34, length: 21, recall: 0.55, max_missed: 8, median_login_s: 115.0 },
];

fn list_scheme(id: &str) -> Scheme {
    let mut def = Scheme::preset("assoc-list")
        .expect("preset")
        .definition()
        .clone();
    def.id = id.to_string();
    Scheme::from_definition(def).expect("valid copy of a preset")
}

fn main() -> io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(274);
    let mut records = Vec::new();
    for g in &GROUPS {
        let scheme = match g.scheme {
            "textual" | "gcps" => Scheme::preset(g.scheme).expect("preset"),
            id => list_scheme(id),
        };
        // spaces would not survive the CSV round trip of a password's edges
        let alphabet: Vec<SymbolId> = (0..scheme.symbol_count() as u32)
            .map(SymbolId)
            .filter(|&s| scheme.symbol_wire(s) != " ")
            .collect();
        let pick = |rng: &mut ChaCha8Rng| alphabet[rng.gen_range(0..alphabet.len())];
        for _ in 0..g.n {
            let original: Vec<SymbolId> = (0..g.length).map(|_| pick(&mut rng)).collect();
            let missed = rng.gen_range(0..=g.max_missed);
            let guess: Vec<SymbolId> = original[..g.length - missed]
                .iter()
                .map(|&s| {
                    if rng.gen_bool(g.recall) {
                        s
                    } else {
                        pick(&mut rng)
                    }
                })
                .collect();
            let login = g.median_login_s * rng.gen_range(0.6..1.6);
            let k = records.len() + 1;
            let seq = |symbols| PasswordSeq {
                scheme_id: scheme.id.clone(),
                symbols,
            };
            records.push(ObservationRecord {
                record_id: format!("r{k:03}"),
                scheme_id: scheme.id.clone(),
                participant_id: format!("p{k:03}"),
                observer_type: g.observer,
                original: scheme.encode(&seq(original)),
                guess: scheme.encode(&seq(guess)),
                login_time_s: Some((login * 100.0).round() / 100.0),
            });
        }
    }
    surfbench::dataset::write_csv(&records, io::stdout().lock()).map_err(io::Error::other)
}
