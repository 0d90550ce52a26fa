//! Seeded synthetic sports-league generator with known entailment ground
//! truth: a round-robin schedule whose matches are reported in articles as
//! one outcome-class and one play-class relation each.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalkit::{generate_pairs, EntailmentPair, ParaphraseClusters, PredClass, Specificity};
use crate::relmodel::{
    format_day, parse_day, Corpus, EntityPairId, PredicateId, RelationInstance, TimeInterval,
    TypePair,
};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lexicon {
    pub win: Vec<String>,
    pub lose: Vec<String>,
    pub tie: Vec<String>,
    pub play: Vec<String>,
}

impl Lexicon {
    pub fn class(&self, class: PredClass) -> &[String] {
        match class {
            PredClass::Win => &self.win,
            PredClass::Lose => &self.lose,
            PredClass::Tie => &self.tie,
            PredClass::Play => &self.play,
        }
    }

    /// Clusters over the lexicon with every predicate non-specific.
    pub fn clusters(&self) -> Result<ParaphraseClusters> {
        let mut entries = Vec::new();
        for class in PredClass::ALL {
            for name in self.class(class) {
                entries.push((class, name.clone(), Specificity::NonSpecific));
            }
        }
        ParaphraseClusters::new(entries)
    }
}

impl Default for Lexicon {
    fn default() -> Lexicon {
        let v = |names: &[&str]| names.iter().map(|s| s.to_string()).collect();
        Lexicon {
            win: v(&[
                "beat",
                "defeat",
                "win.against",
                "overcome",
                "overpower",
                "top",
                "best",
                "conquer",
                "vanquish",
                "outclass",
                "outplay",
                "upset",
                "down",
                "hold.off",
                "prevail.over",
                "triumph.over",
                "crush",
                "rout",
                "thrash",
                "hammer",
                "demolish",
                "blank",
                "shut.out",
                "edge",
                "nip",
                "squeak.past",
            ]),
            lose: v(&[
                "lose.to",
                "fall.to",
                "lost.against",
                "suffer.defeat.to",
                "go.down.to",
            ]),
            tie: v(&["draw.with", "tie.with", "draw.against"]),
            play: v(&[
                "play",
                "face",
                "meet",
                "take.on",
                "play.against",
                "host",
                "visit",
                "clash.with",
            ]),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeagueConfig {
    pub num_teams: u32,
    pub num_matchdays: u32,
    /// Days between consecutive matchdays.
    pub matchday_spacing: u32,
    pub articles_per_match: u32,
    /// Maximum days between a match and an article reporting it.
    pub report_lag_max: u32,
    /// Probability that a relation carries a timex interval on the match day.
    pub timex_probability: f64,
    /// (home win, home loss, draw), summing to 1.
    pub outcome_probabilities: [f64; 3],
    pub rng_seed: u64,
    /// Match day of the first round, as an ISO-8601 date.
    pub start_date: String,
    pub predicate_lexicon: Lexicon,
}

impl Default for LeagueConfig {
    fn default() -> LeagueConfig {
        LeagueConfig {
            num_teams: 8,
            num_matchdays: 14,
            matchday_spacing: 7,
            articles_per_match: 3,
            report_lag_max: 2,
            timex_probability: 0.19,
            outcome_probabilities: [0.45, 0.45, 0.10],
            rng_seed: 7,
            start_date: "2019-01-05".to_string(),
            predicate_lexicon: Lexicon::default(),
        }
    }
}

impl LeagueConfig {
    pub fn from_toml(text: &str) -> Result<LeagueConfig> {
        let cfg: LeagueConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<LeagueConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        LeagueConfig::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.num_teams < 2 {
            return fail("num_teams must be at least 2");
        }
        if self.num_matchdays < 1 {
            return fail("num_matchdays must be at least 1");
        }
        if self.matchday_spacing < 1 {
            return fail("matchday_spacing must be at least 1");
        }
        if self.articles_per_match < 1 {
            return fail("articles_per_match must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.timex_probability) {
            return fail("timex_probability must be in [0, 1]");
        }
        let sum: f64 = self.outcome_probabilities.iter().sum();
        if self.outcome_probabilities.iter().any(|p| *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return fail("outcome_probabilities must be non-negative and sum to 1");
        }
        parse_day(&self.start_date)?;
        self.predicate_lexicon.clusters()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchResult {
    HomeWin,
    AwayWin,
    Draw,
}

impl MatchResult {
    fn as_str(self) -> &'static str {
        match self {
            MatchResult::HomeWin => "home-win",
            MatchResult::AwayWin => "away-win",
            MatchResult::Draw => "draw",
        }
    }
}

#[derive(Clone, Debug)]
pub struct MatchRecord {
    pub home: String,
    pub away: String,
    pub day: i64,
    pub result: MatchResult,
}

/// Schedule and labels behind a generated corpus.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub matches: Vec<MatchRecord>,
    /// Labeled predicate pairs over the lexicon, per the labeling pattern.
    pub pairs: Vec<EntailmentPair>,
}

/// Fixtures of one round under the circle method: slot 0 stays fixed and
/// the others rotate, so each pair meets once per `slots - 1` rounds.
fn round_fixtures(slots: u32, round: u32) -> Vec<(u32, u32)> {
    let rotate = |i: u32| {
        if i == 0 {
            0
        } else {
            1 + (i - 1 + round) % (slots - 1)
        }
    };
    (0..slots / 2)
        .map(|k| (rotate(k), rotate(slots - 1 - k)))
        .collect()
}

/// Generates the corpus and ground truth for a league configuration.
///
/// Every article about a match yields one outcome-class relation (winner
/// first for win predicates, loser first for lose predicates) and one
/// play-class relation in the same argument order, dated by the article's
/// creation date and optionally time-stamped with the true match day.
pub fn generate(cfg: &LeagueConfig) -> Result<(Corpus, GroundTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let start = parse_day(&cfg.start_date)?;
    let type_pair = TypePair::new("organization", "organization");
    let team = |i: u32| format!("team_{i:02}");
    let slots = cfg.num_teams + cfg.num_teams % 2;
    let rounds_per_cycle = slots - 1;

    let mut instances = Vec::new();
    let mut matches = Vec::new();
    for md in 0..cfg.num_matchdays {
        let day = start + i64::from(md) * i64::from(cfg.matchday_spacing);
        let cycle = md / rounds_per_cycle;
        for (a, b) in round_fixtures(slots, md % rounds_per_cycle) {
            if a >= cfg.num_teams || b >= cfg.num_teams {
                continue;
            }
            // Swap venues on every other cycle so repeat fixtures reverse.
            let (home, away) = if cycle.is_multiple_of(2) { (a, b) } else { (b, a) };
            let roll: f64 = rng.gen();
            let result = if roll < cfg.outcome_probabilities[0] {
                MatchResult::HomeWin
            } else if roll < cfg.outcome_probabilities[0] + cfg.outcome_probabilities[1] {
                MatchResult::AwayWin
            } else {
                MatchResult::Draw
            };
            let match_idx = matches.len();
            matches.push(MatchRecord {
                home: team(home),
                away: team(away),
                day,
                result,
            });

            let (winner, loser) = match result {
                MatchResult::HomeWin => (home, away),
                MatchResult::AwayWin | MatchResult::Draw => (away, home),
            };
            for article in 0..cfg.articles_per_match {
                let lag = rng.gen_range(0..=i64::from(cfg.report_lag_max));
                let doc_date = day + lag;
                let lex = &cfg.predicate_lexicon;
                let (class, subj, obj) = match result {
                    MatchResult::Draw => {
                        if rng.gen_bool(0.5) {
                            (PredClass::Tie, home, away)
                        } else {
                            (PredClass::Tie, away, home)
                        }
                    }
                    _ => {
                        if rng.gen_bool(0.5) {
                            (PredClass::Win, winner, loser)
                        } else {
                            (PredClass::Lose, loser, winner)
                        }
                    }
                };
                let outcome_pred = lex.class(class).choose(&mut rng).unwrap();
                let play_pred = lex.class(PredClass::Play).choose(&mut rng).unwrap();
                let doc_id = format!("m{match_idx:03}_a{article}");
                for pred in [outcome_pred, play_pred] {
                    let timexes = if rng.gen_bool(cfg.timex_probability) {
                        vec![TimeInterval::day(day)]
                    } else {
                        vec![]
                    };
                    instances.push(RelationInstance {
                        predicate: PredicateId::new(pred, type_pair.clone()),
                        entity_pair: EntityPairId::new(team(subj), team(obj)),
                        timex_intervals: timexes,
                        doc_date: Some(doc_date),
                        doc_id: Some(doc_id.clone()),
                    });
                }
            }
        }
    }

    let pairs = generate_pairs(&cfg.predicate_lexicon.clusters()?);
    Ok((Corpus::new(instances), GroundTruth { matches, pairs }))
}

/// Writes the match schedule as `home \t away \t date \t result` lines.
pub fn write_matches(path: impl AsRef<Path>, matches: &[MatchRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for m in matches {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            m.home,
            m.away,
            format_day(m.day),
            m.result.as_str()
        )
        .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
