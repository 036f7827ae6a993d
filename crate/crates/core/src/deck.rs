//! Input decks.
//!
//! ```text
//! # comments start with '#'
//! [simulation]
//! nx = 64
//! ny = 64
//! dx = 0.1
//! dy = 0.1
//! dt = 0.07
//! n_steps = 500
//! seed = 0            # default 0
//!
//! [tiles]
//! tile_nx = 16
//! tile_ny = 16
//! guard = 3           # default 3
//!
//! [species "electrons"]   # repeatable
//! m_over_q = -1.0
//! ppc_x = 10
//! ppc_y = 10
//! ufl_x = 0.0         # ufl_*, uth_* default 0
//! uth_x = 0.1
//! density = 1.0       # default 1
//!
//! [diagnostics]
//! report_every = 50   # default 0: final step only
//! fields = b_abs, bz, charge, energy
//!
//! [features]
//! filter_passes = 0   # default 0
//! moving_window = false
//! ```
//!
//! Unknown sections and keys are errors. [`Deck::to_text`] writes the
//! canonical form, which parses back to the same deck.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::config::{validate_config, SimConfig, SpeciesSpec};
use crate::engine::{ReportKind, DEFAULT_REPORTS};
use crate::error::{Error, LineError, ParseErrors, Result};
use crate::vec3::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct Deck {
    pub config: SimConfig,
    pub reports: Vec<ReportKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Section {
    Simulation,
    Tiles,
    Species(usize),
    Diagnostics,
    Features,
}

const REQUIRED: [(&str, &[&str]); 2] = [
    ("simulation", &["nx", "ny", "dx", "dy", "dt", "n_steps"]),
    ("tiles", &["tile_nx", "tile_ny"]),
];

struct Parser {
    cfg: SimConfig,
    reports: Vec<ReportKind>,
    errors: Vec<LineError>,
    seen: HashSet<(Section, String)>,
    headers: Vec<(Section, usize)>,
    species_required: Vec<(usize, [bool; 3])>,
}

fn value<T: FromStr>(raw: &str, what: &str) -> std::result::Result<T, String> {
    raw.parse().map_err(|_| format!("`{raw}` is not a valid {what}"))
}

impl Parser {
    fn err(&mut self, line: usize, msg: impl Into<String>) {
        self.errors.push(LineError { line, msg: msg.into() });
    }

    fn header(&mut self, line: usize, inner: &str) -> Option<Section> {
        let section = match inner.trim() {
            "simulation" => Section::Simulation,
            "tiles" => Section::Tiles,
            "diagnostics" => Section::Diagnostics,
            "features" => Section::Features,
            other => {
                let Some(rest) = other.strip_prefix("species") else {
                    self.err(line, format!("unknown section [{other}]"));
                    return None;
                };
                let name = rest.trim();
                let Some(name) = name.strip_prefix('"').and_then(|n| n.strip_suffix('"')) else {
                    self.err(line, "species header must look like [species \"name\"]");
                    return None;
                };
                self.cfg.species.push(SpeciesSpec::new(name, 0.0, (0, 0)));
                self.species_required.push((line, [false; 3]));
                Section::Species(self.cfg.species.len() - 1)
            }
        };
        if !matches!(section, Section::Species(_)) {
            if let Some(&(_, first)) = self.headers.iter().find(|(s, _)| *s == section) {
                self.err(line, format!("duplicate section [{}] (first at line {first})", inner.trim()));
            }
        }
        self.headers.push((section, line));
        Some(section)
    }

    fn assign(&mut self, section: Section, key: &str, raw: &str) -> std::result::Result<(), String> {
        let cfg = &mut self.cfg;
        match section {
            Section::Simulation => match key {
                "nx" => cfg.nx = value(raw, "cell count")?,
                "ny" => cfg.ny = value(raw, "cell count")?,
                "dx" => cfg.dx = value(raw, "number")?,
                "dy" => cfg.dy = value(raw, "number")?,
                "dt" => cfg.dt = value(raw, "number")?,
                "n_steps" => cfg.n_steps = value(raw, "step count")?,
                "seed" => cfg.seed = value(raw, "seed")?,
                _ => return Err(format!("unknown key `{key}` in [simulation]")),
            },
            Section::Tiles => match key {
                "tile_nx" => cfg.tile_nx = value(raw, "cell count")?,
                "tile_ny" => cfg.tile_ny = value(raw, "cell count")?,
                "guard" => cfg.guard = value(raw, "cell count")?,
                _ => return Err(format!("unknown key `{key}` in [tiles]")),
            },
            Section::Species(k) => {
                let s = &mut cfg.species[k];
                let req = &mut self.species_required[k].1;
                match key {
                    "m_over_q" => {
                        s.m_over_q = value(raw, "number")?;
                        req[0] = true;
                    }
                    "ppc_x" => {
                        s.ppc.0 = value(raw, "particle count")?;
                        req[1] = true;
                    }
                    "ppc_y" => {
                        s.ppc.1 = value(raw, "particle count")?;
                        req[2] = true;
                    }
                    "ufl_x" => s.u_fl.x = value(raw, "number")?,
                    "ufl_y" => s.u_fl.y = value(raw, "number")?,
                    "ufl_z" => s.u_fl.z = value(raw, "number")?,
                    "uth_x" => s.u_th.x = value(raw, "number")?,
                    "uth_y" => s.u_th.y = value(raw, "number")?,
                    "uth_z" => s.u_th.z = value(raw, "number")?,
                    "density" => s.density = value(raw, "number")?,
                    _ => return Err(format!("unknown key `{key}` in [species \"{}\"]", s.name)),
                }
            }
            Section::Diagnostics => match key {
                "report_every" => cfg.report_every = value(raw, "step count")?,
                "fields" => {
                    let mut kinds = Vec::new();
                    for name in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        let kind = ReportKind::from_name(name).ok_or_else(|| {
                            let known: Vec<&str> = ReportKind::ALL.iter().map(|k| k.name()).collect();
                            format!("unknown report field `{name}` (known: {})", known.join(", "))
                        })?;
                        if !kinds.contains(&kind) {
                            kinds.push(kind);
                        }
                    }
                    self.reports = kinds;
                }
                _ => return Err(format!("unknown key `{key}` in [diagnostics]")),
            },
            Section::Features => match key {
                "filter_passes" => cfg.filter_passes = value(raw, "pass count")?,
                "moving_window" => cfg.moving_window = value(raw, "boolean (true or false)")?,
                _ => return Err(format!("unknown key `{key}` in [features]")),
            },
        }
        Ok(())
    }

    fn finish(&mut self, last_line: usize) {
        for (name, keys) in REQUIRED {
            let section = if name == "simulation" { Section::Simulation } else { Section::Tiles };
            match self.headers.iter().find(|(s, _)| *s == section) {
                None => self.err(last_line, format!("missing section [{name}]")),
                Some(&(_, line)) => {
                    for key in keys {
                        if !self.seen.contains(&(section, key.to_string())) {
                            self.err(line, format!("[{name}] is missing required key `{key}`"));
                        }
                    }
                }
            }
        }
        for k in 0..self.species_required.len() {
            let (line, req) = self.species_required[k];
            for (have, key) in req.iter().zip(["m_over_q", "ppc_x", "ppc_y"]) {
                if !have {
                    let name = self.cfg.species[k].name.clone();
                    self.err(line, format!("[species \"{name}\"] is missing required key `{key}`"));
                }
            }
        }
        self.errors.sort_by_key(|e| e.line);
    }
}

/// Parses a deck without checking physical validity.
pub fn parse_deck_unchecked(text: &str) -> Result<Deck> {
    let mut p = Parser {
        cfg: SimConfig { report_every: 0, species: Vec::new(), seed: 0, guard: 3, filter_passes: 0, moving_window: false, ..SimConfig::default() },
        reports: DEFAULT_REPORTS.to_vec(),
        errors: Vec::new(),
        seen: HashSet::new(),
        headers: Vec::new(),
        species_required: Vec::new(),
    };
    let mut section: Option<Section> = None;
    let mut skipping = false;
    let mut last_line = 0;
    for (k, raw_line) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(inner) = content.strip_prefix('[') {
            let Some(inner) = inner.strip_suffix(']') else {
                p.err(line, "unterminated section header");
                skipping = true;
                continue;
            };
            section = p.header(line, inner);
            skipping = section.is_none();
            continue;
        }
        if skipping {
            continue;
        }
        let Some((key, raw)) = content.split_once('=') else {
            p.err(line, format!("expected `key = value`, got `{content}`"));
            continue;
        };
        let (key, raw) = (key.trim(), raw.trim());
        let Some(sec) = section else {
            p.err(line, format!("key `{key}` outside of any section"));
            continue;
        };
        if !p.seen.insert((sec, key.to_string())) {
            p.err(line, format!("duplicate key `{key}`"));
            continue;
        }
        if let Err(msg) = p.assign(sec, key, raw) {
            p.err(line, msg);
        }
    }
    p.finish(last_line.max(1));
    if !p.errors.is_empty() {
        return Err(ParseErrors(p.errors).into());
    }
    Ok(Deck { config: p.cfg, reports: p.reports })
}

/// Parses a deck and validates the resulting configuration.
pub fn parse_deck(text: &str) -> Result<Deck> {
    let deck = parse_deck_unchecked(text)?;
    let config = validate_config(deck.config)?;
    Ok(Deck { config, ..deck })
}

impl Deck {
    /// Canonical text form.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "[simulation]");
        let _ = writeln!(s, "nx = {}\nny = {}", c.nx, c.ny);
        let _ = writeln!(s, "dx = {:?}\ndy = {:?}\ndt = {:?}", c.dx, c.dy, c.dt);
        let _ = writeln!(s, "n_steps = {}\nseed = {}", c.n_steps, c.seed);
        let _ = writeln!(s, "\n[tiles]");
        let _ = writeln!(s, "tile_nx = {}\ntile_ny = {}\nguard = {}", c.tile_nx, c.tile_ny, c.guard);
        for sp in &c.species {
            let _ = writeln!(s, "\n[species \"{}\"]", sp.name);
            let _ = writeln!(s, "m_over_q = {:?}", sp.m_over_q);
            let _ = writeln!(s, "ppc_x = {}\nppc_y = {}", sp.ppc.0, sp.ppc.1);
            for (axis, v) in ["x", "y", "z"].iter().zip([sp.u_fl.x, sp.u_fl.y, sp.u_fl.z]) {
                let _ = writeln!(s, "ufl_{axis} = {v:?}");
            }
            for (axis, v) in ["x", "y", "z"].iter().zip([sp.u_th.x, sp.u_th.y, sp.u_th.z]) {
                let _ = writeln!(s, "uth_{axis} = {v:?}");
            }
            if sp.density != 1.0 {
                let _ = writeln!(s, "density = {:?}", sp.density);
            }
        }
        let _ = writeln!(s, "\n[diagnostics]");
        let _ = writeln!(s, "report_every = {}", c.report_every);
        let names: Vec<&str> = self.reports.iter().map(|k| k.name()).collect();
        let _ = writeln!(s, "fields = {}", names.join(", "));
        let _ = writeln!(s, "\n[features]");
        let _ = writeln!(s, "filter_passes = {}\nmoving_window = {}", c.filter_passes, c.moving_window);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Cold,
    Warm,
    Weibel,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cold" => Ok(Preset::Cold),
            "warm" => Ok(Preset::Warm),
            "weibel" => Ok(Preset::Weibel),
            _ => Err(Error::InvalidArgument(format!("unknown preset `{s}` (expected cold, warm or weibel)"))),
        }
    }
}

/// Counter-streaming drift and thermal spread of the Weibel preset.
pub const WEIBEL_U_STREAM: f64 = 0.6;
pub const WEIBEL_U_TH: f64 = 0.1;

/// Largest tile edge in `[2, 25]` dividing `n`, else `n` itself.
fn tile_edge(n: usize) -> usize {
    (2..=25.min(n)).rev().find(|t| n % t == 0).unwrap_or(n)
}

/// The three reference cases on a `500·scale` square grid with 10×10
/// particles per cell and species.
pub fn preset(kind: Preset, scale: f64) -> Result<Deck> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::InvalidArgument(format!("scale must be in (0, 1], got {scale}")));
    }
    let n = (500.0 * scale).round() as usize;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("scale {scale} gives a grid smaller than 2×2")));
    }
    let tile = tile_edge(n);
    let ppc = (10, 10);
    let species = match kind {
        Preset::Cold => vec![SpeciesSpec::new("electrons", -1.0, ppc)],
        Preset::Warm => vec![SpeciesSpec::new("electrons", -1.0, ppc).with_thermal(Vec3::new(1.0, 1.0, 1.0))],
        Preset::Weibel => {
            let th = Vec3::new(WEIBEL_U_TH, WEIBEL_U_TH, WEIBEL_U_TH);
            vec![
                SpeciesSpec::new("electrons", -1.0, ppc)
                    .with_fluid(Vec3::new(0.0, 0.0, WEIBEL_U_STREAM))
                    .with_thermal(th),
                SpeciesSpec::new("positrons", 1.0, ppc)
                    .with_fluid(Vec3::new(0.0, 0.0, -WEIBEL_U_STREAM))
                    .with_thermal(th),
            ]
        }
    };
    let config = SimConfig {
        nx: n,
        ny: n,
        dx: 0.1,
        dy: 0.1,
        dt: 0.07,
        n_steps: 500,
        tile_nx: tile,
        tile_ny: tile,
        guard: 3,
        species,
        filter_passes: 0,
        moving_window: false,
        seed: 0,
        report_every: 50,
    };
    Ok(Deck { config: validate_config(config)?, reports: DEFAULT_REPORTS.to_vec() })
}

/// Canonical text of a preset deck.
pub fn preset_deck(kind: Preset, scale: f64) -> Result<String> {
    Ok(preset(kind, scale)?.to_text())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[simulation]
nx = 32
ny = 16
dx = 0.1
dy = 0.1
dt = 0.05
n_steps = 10

[tiles]
tile_nx = 8
tile_ny = 8
";

    #[test]
    fn minimal_deck_defaults() {
        let d = parse_deck(MINIMAL).unwrap();
        let c = &d.config;
        assert_eq!((c.nx, c.ny, c.tile_nx, c.tile_ny), (32, 16, 8, 8));
        assert_eq!(c.guard, 3);
        assert_eq!(c.filter_passes, 0);
        assert!(!c.moving_window);
        assert_eq!(c.seed, 0);
        assert_eq!(c.report_every, 0);
        assert!(c.species.is_empty());
        assert_eq!(d.reports, DEFAULT_REPORTS.to_vec());
    }

    #[test]
    fn courant_violation_names_limit() {
        let text = MINIMAL.replace("dt = 0.05", "dt = 0.08");
        let msg = parse_deck(&text).unwrap_err().to_string();
        assert!(msg.contains("0.0707106781186547"), "{msg}");
    }

    #[test]
    fn misspelled_key_reports_line() {
        let text = MINIMAL.replace("tile_nx = 8", "tilenx = 8");
        match parse_deck(&text).unwrap_err() {
            Error::Parse(ParseErrors(errs)) => {
                assert!(errs.iter().any(|e| e.line == 10 && e.msg.contains("unknown key `tilenx`")));
                // the missing tile_nx is reported at the section header
                assert!(errs.iter().any(|e| e.line == 9 && e.msg.contains("tile_nx")));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn collects_every_error() {
        let text = "[simulation]\nnx = many\nbogus = 1\n[nowhere]\nx = 1\n[species electrons]\n";
        let Error::Parse(ParseErrors(errs)) = parse_deck(text).unwrap_err() else { panic!() };
        let lines: Vec<usize> = errs.iter().map(|e| e.line).collect();
        assert!(lines.contains(&2) && lines.contains(&3) && lines.contains(&4) && lines.contains(&6));
    }

    #[test]
    fn duplicates_rejected() {
        let text = format!("{MINIMAL}nx = 4\n");
        assert!(parse_deck(&text).is_err());
        let text = format!("{MINIMAL}[tiles]\n");
        let msg = parse_deck(&text).unwrap_err().to_string();
        assert!(msg.contains("duplicate section"), "{msg}");
    }

    #[test]
    fn species_and_features() {
        let text = format!(
            "{MINIMAL}\n[species \"ions\"]\nm_over_q = 100.0\nppc_x = 2\nppc_y = 3\nufl_z = 0.5 # drift\n\
             uth_x = 0.01\ndensity = 2.5\n[diagnostics]\nreport_every = 5\nfields = bz, energy\n\
             [features]\nfilter_passes = 2\nmoving_window = true\n"
        );
        let d = parse_deck(&text).unwrap();
        let s = &d.config.species[0];
        assert_eq!(s.name, "ions");
        assert_eq!(s.ppc, (2, 3));
        assert_eq!(s.u_fl, Vec3::new(0.0, 0.0, 0.5));
        assert_eq!(s.u_th.x, 0.01);
        assert_eq!(s.density, 2.5);
        assert_eq!(d.reports, vec![ReportKind::Bz, ReportKind::Energy]);
        assert_eq!(d.config.filter_passes, 2);
        assert!(d.config.moving_window);
        assert_eq!(parse_deck(&d.to_text()).unwrap(), d);
    }

    #[test]
    fn presets() {
        let cold = preset(Preset::Cold, 1.0).unwrap();
        assert_eq!((cold.config.nx, cold.config.ny), (500, 500));
        assert_eq!(cold.config.tile_nx, 25);
        let small = preset(Preset::Cold, 0.128).unwrap().config;
        assert_eq!((small.nx, small.ny), (64, 64));
        assert_eq!(small.nx * small.ny * 100, 409_600);
        let weibel = preset(Preset::Weibel, 1.0).unwrap().config;
        assert_eq!(weibel.species.len(), 2);
        assert_eq!(weibel.species[0].m_over_q, -1.0);
        assert_eq!(weibel.species[1].m_over_q, 1.0);
        assert_eq!(weibel.species[0].u_fl.z, -weibel.species[1].u_fl.z);
        let warm = preset(Preset::Warm, 0.5).unwrap().config;
        assert_eq!(warm.species[0].u_th, Vec3::new(1.0, 1.0, 1.0));
        assert!(preset(Preset::Cold, 0.0).is_err());
        assert!(preset(Preset::Cold, 1.5).is_err());
        assert!("plasma".parse::<Preset>().is_err());
        for kind in [Preset::Cold, Preset::Warm, Preset::Weibel] {
            let text = preset_deck(kind, 0.128).unwrap();
            assert_eq!(parse_deck(&text).unwrap().to_text(), text);
        }
    }

    #[test]
    fn tile_edges() {
        assert_eq!(tile_edge(500), 25);
        assert_eq!(tile_edge(64), 16);
        assert_eq!(tile_edge(250), 25);
        assert_eq!(tile_edge(31), 31);
        assert_eq!(tile_edge(2), 2);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn real() -> impl Strategy<Value = f64> {
            prop_oneof![-1e300..1e300f64, -1.0..1.0f64, Just(0.0), Just(-0.0), Just(f64::MIN_POSITIVE)]
        }

        fn species() -> impl Strategy<Value = SpeciesSpec> {
            ("[a-z][a-z0-9_]{0,8}", real(), 1usize..20, 1usize..20, [real(), real(), real()], [real(), real(), real()], real())
                .prop_map(|(name, mq, px, py, fl, th, density)| {
                    let mut s = SpeciesSpec::new(name, mq, (px, py))
                        .with_fluid(Vec3::new(fl[0], fl[1], fl[2]))
                        .with_thermal(Vec3::new(th[0], th[1], th[2]));
                    s.density = density;
                    s
                })
        }

        prop_compose! {
            fn deck()(
                dims in [0usize..10_000, 0usize..10_000, 0usize..100, 0usize..100, 0usize..10],
                steps in [any::<u64>(), any::<u64>(), any::<u64>()],
                reals in [real(), real(), real()],
                species in proptest::collection::vec(species(), 0..4),
                filter in 0usize..10,
                window in any::<bool>(),
                reports in proptest::sample::subsequence(ReportKind::ALL.to_vec(), 0..=6),
            ) -> Deck {
                Deck {
                    config: SimConfig {
                        nx: dims[0], ny: dims[1], tile_nx: dims[2], tile_ny: dims[3], guard: dims[4],
                        dx: reals[0], dy: reals[1], dt: reals[2],
                        n_steps: steps[0], seed: steps[1], report_every: steps[2],
                        species, filter_passes: filter, moving_window: window,
                    },
                    reports,
                }
            }
        }

        proptest! {
            #[test]
            fn canonical_text_is_a_fixpoint(d in deck()) {
                let text = d.to_text();
                let back = parse_deck_unchecked(&text).unwrap();
                prop_assert_eq!(&back, &d);
                prop_assert_eq!(back.to_text(), text);
            }
        }
    }
}
