//! Built-in scheme definitions.

use std::collections::BTreeMap;

use crate::scheme::{CategoryDefinition, Codec, GroupDefinition, SchemeDefinition};

// US layout rows, unshifted and shifted. AltGr produces nothing by default.
const UNSHIFTED: &str = "`1234567890-=qwertyuiop[]\\asdfghjkl;'zxcvbnm,./";
const SHIFTED: &str = "~!@#$%^&*()_+QWERTYUIOP{}|ASDFGHJKL:\"ZXCVBNM<>?";

pub fn textual() -> SchemeDefinition {
    let mut layout = BTreeMap::new();
    for (plain, shifted) in UNSHIFTED.chars().zip(SHIFTED.chars()) {
        layout.insert(
            plain.to_string(),
            vec![plain.to_string(), "none".to_string()],
        );
        layout.insert(
            shifted.to_string(),
            vec![plain.to_string(), "shift".to_string()],
        );
    }
    layout.insert(
        " ".to_string(),
        vec!["space".to_string(), "none".to_string()],
    );

    let class = |pred: fn(&char) -> bool| -> Vec<String> {
        layout
            .keys()
            .filter(|k| k.chars().next().is_some_and(|c| pred(&c)))
            .cloned()
            .collect()
    };
    let numeric = class(char::is_ascii_digit);
    let lowercase = class(char::is_ascii_lowercase);
    let uppercase = class(char::is_ascii_uppercase);

    SchemeDefinition {
        id: "textual".into(),
        pool_size: 95,
        codec: Codec::TextualLayout,
        match_groups: vec![
            GroupDefinition {
                name: "key".into(),
                size: 49,
                values: None,
            },
            GroupDefinition {
                name: "modifier".into(),
                size: 3,
                values: Some(vec!["none".into(), "shift".into(), "altgr".into()]),
            },
        ],
        entropy_categories: vec![
            CategoryDefinition {
                name: "numeric".into(),
                members: Some(numeric),
            },
            CategoryDefinition {
                name: "lowercase".into(),
                members: Some(lowercase),
            },
            CategoryDefinition {
                name: "uppercase".into(),
                members: Some(uppercase),
            },
            CategoryDefinition {
                name: "symbols".into(),
                members: None,
            },
        ],
        layout: Some(layout),
        token_order: None,
        lists: None,
    }
}

pub fn gcps() -> SchemeDefinition {
    let squares = "abcdefgh"
        .chars()
        .flat_map(|file| (1..=8).map(move |rank| format!("{file}{rank}")))
        .collect();
    let strings = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    SchemeDefinition {
        id: "gcps".into(),
        pool_size: 768,
        codec: Codec::TokenList,
        match_groups: vec![
            GroupDefinition {
                name: "figure".into(),
                size: 6,
                values: Some(strings(&["P", "R", "N", "B", "Q", "K"])),
            },
            GroupDefinition {
                name: "color".into(),
                size: 2,
                values: Some(strings(&["W", "B"])),
            },
            GroupDefinition {
                name: "square".into(),
                size: 64,
                values: Some(squares),
            },
        ],
        entropy_categories: vec![CategoryDefinition {
            name: "all".into(),
            members: None,
        }],
        layout: None,
        token_order: Some(strings(&["color", "figure", "square"])),
        lists: None,
    }
}

const LIST_COLUMNS: [[&str; 10]; 3] = [
    [
        "anchor", "bridge", "candle", "desert", "engine", "forest", "garden", "harbor", "island",
        "jacket",
    ],
    [
        "kettle", "ladder", "mirror", "needle", "orange", "pillow", "quiver", "rocket", "saddle",
        "tunnel",
    ],
    [
        "violin", "window", "yellow", "zipper", "basket", "castle", "dragon", "feather", "glacier",
        "hammer",
    ],
];

pub fn assoc_list() -> SchemeDefinition {
    SchemeDefinition {
        id: "assoc-list".into(),
        pool_size: 10,
        codec: Codec::IndexedList,
        match_groups: vec![GroupDefinition {
            name: "word".into(),
            size: 10,
            values: None,
        }],
        entropy_categories: vec![CategoryDefinition {
            name: "all".into(),
            members: None,
        }],
        layout: None,
        token_order: None,
        lists: Some(
            LIST_COLUMNS
                .iter()
                .map(|col| col.iter().map(|w| w.to_string()).collect())
                .collect(),
        ),
    }
}
