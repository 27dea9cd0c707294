//! Bundled proof scripts. Each is checked by the test suite and by the CLI `corpus` command.

pub struct CorpusEntry {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! entries {
    ($($name:literal),* $(,)?) => {
        &[$(CorpusEntry {
            name: $name,
            text: include_str!(concat!("../../corpus/", $name, ".ndp")),
        }),*]
    };
}

static CORPUS: &[CorpusEntry] = entries![
    "anon_empty",
    "anon_mono",
    "anon_perm",
    "anon_weak",
    "approx_zero",
    "chain3",
    "classical_raa",
    "conjoin_inside",
    "diagonal",
    "exists_ext",
    "expansion",
    "forall_and_merge",
    "forall_and_split",
    "forall_rename",
    "forall_swap",
    "nf_inclusion",
    "or_ext_roundtrip",
    "refl",
    "repeat",
    "sim_roundtrip",
    "trans",
    "universal_weakening",
    "weak_neg_input",
    "weak_neg_raa",
    "witness",
];

pub fn corpus() -> &'static [CorpusEntry] {
    CORPUS
}
