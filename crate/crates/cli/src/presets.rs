//! Built-in scenarios, one per figure of the reference experiments.

pub const PRESETS: &[(&str, &str)] = &[
    ("fig2a", include_str!("../fixtures/fig2a.toml")),
    ("fig2b", include_str!("../fixtures/fig2b.toml")),
    ("fig2c", include_str!("../fixtures/fig2c.toml")),
    ("fig3a", include_str!("../fixtures/fig3a.toml")),
    ("fig3b", include_str!("../fixtures/fig3b.toml")),
    ("fig3c", include_str!("../fixtures/fig3c.toml")),
    ("fig6", include_str!("../fixtures/fig6.toml")),
    ("fig7", include_str!("../fixtures/fig7.toml")),
    ("fig8", include_str!("../fixtures/fig8.toml")),
    ("dfs_tables", include_str!("../fixtures/dfs_tables.toml")),
    ("dfs_phi", include_str!("../fixtures/dfs_phi.toml")),
    ("dfs_singlet", include_str!("../fixtures/dfs_singlet.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}
