//! Deterministic synthetic knowledge-graph fixture: a ~1K-entity world with
//! community structure, recursive type chains, name-dependency chains,
//! timestamps, quantities, aliases, and filterable junk entities. Used by
//! the end-to-end tests and the `gen-fixture` command.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::kg::EntityId;

pub struct FixtureKg {
    pub entities_jsonl: String,
    pub facts_jsonl: String,
    pub relations_json: String,
    /// Hub entities that make good sampler seeds.
    pub suggested_seeds: Vec<EntityId>,
}

const HEADS: [&str; 14] = [
    "Bar", "Kel", "Mor", "Vel", "Dra", "Lis", "Quor", "Zan", "Hul", "Tor", "Fen", "Gal", "Ryn",
    "Sab",
];
const TAILS: [&str; 12] =
    ["eth", "wyn", "ath", "isse", "orin", "unel", "ell", "arid", "imor", "osk", "avel", "yne"];
const LOWER_WORDS: [&str; 14] = [
    "brindleweed", "skyglass", "murkstone", "fernwork", "softspar", "tidemilk", "gleamcraft",
    "duskwool", "embertrade", "rillfarming", "moteweaving", "hollowcraft", "saltbinding",
    "wispkeeping",
];

struct Builder {
    rng: ChaCha8Rng,
    entities: Vec<serde_json::Value>,
    facts: Vec<serde_json::Value>,
    next_id: usize,
}

impl Builder {
    fn word(&mut self) -> String {
        let head = HEADS[self.rng.gen_range(0..HEADS.len())];
        let tail = TAILS[self.rng.gen_range(0..TAILS.len())];
        format!("{head}{tail}")
    }

    fn fresh_id(&mut self) -> String {
        self.next_id += 1;
        format!("Q{}", self.next_id)
    }

    fn entity(&mut self, label: &str, types: &[&str], aliases: &[&str]) -> String {
        let id = self.fresh_id();
        self.entities.push(json!({
            "id": id,
            "label": label,
            "aliases": aliases,
            "instance_of": types,
            "flags": [],
        }));
        id
    }

    fn droppable(&mut self) -> String {
        let id = self.fresh_id();
        self.entities.push(json!({
            "id": id, "label": "", "aliases": [], "instance_of": [], "flags": ["droppable"],
        }));
        id
    }

    fn fact(&mut self, subject: &str, property: (&str, &str), object: &str) {
        self.facts.push(json!({
            "subject": subject,
            "property": property.0,
            "property_label": property.1,
            "object": {"entity": object},
            "qualifiers": [],
        }));
    }

    fn fact_with_year(&mut self, subject: &str, property: (&str, &str), object: &str, year: i64) {
        self.facts.push(json!({
            "subject": subject,
            "property": property.0,
            "property_label": property.1,
            "object": {"entity": object},
            "qualifiers": [{
                "property": "P585",
                "property_label": "point in time",
                "literal": {"kind": "timestamp", "value": format!("{year:04}")},
            }],
        }));
    }

    fn literal_fact(&mut self, subject: &str, property: (&str, &str), kind: &str, value: &str) {
        self.facts.push(json!({
            "subject": subject,
            "property": property.0,
            "property_label": property.1,
            "object": {"literal": {"kind": kind, "value": value}},
            "qualifiers": [],
        }));
    }

    fn date(&mut self, lo: i64, hi: i64) -> String {
        let year = self.rng.gen_range(lo..hi);
        let month = self.rng.gen_range(1..13);
        let day = self.rng.gen_range(1..29);
        format!("{year:04}-{month:02}-{day:02}")
    }
}

const LOCATED_IN: (&str, &str) = ("P1", "located in");
const PART_OF: (&str, &str) = ("P2", "part of");
const RESIDENCE: (&str, &str) = ("P3", "residence");
const MEMBER_OF: (&str, &str) = ("P4", "member of");
const EMPLOYER: (&str, &str) = ("P5", "employer");
const EDUCATED_AT: (&str, &str) = ("P6", "educated at");
const AWARD_RECEIVED: (&str, &str) = ("P7", "award received");
const INFLUENCED_BY: (&str, &str) = ("P8", "influenced by");
const TWINNED_WITH: (&str, &str) = ("P9", "twinned with");
const FOUNDED_BY: (&str, &str) = ("P10", "founded by");
const NAMED_AFTER: (&str, &str) = ("P11", "named after");
const GIVEN_NAME: (&str, &str) = ("P12", "given name");
const DATE_OF_BIRTH: (&str, &str) = ("P13", "date of birth");
const INCEPTION: (&str, &str) = ("P14", "inception");
const POPULATION: (&str, &str) = ("P15", "population");
const FIELD_OF_WORK: (&str, &str) = ("P16", "field of work");
const CONFERRED_BY: (&str, &str) = ("P17", "conferred by");

fn relation_defs() -> serde_json::Value {
    json!({
        "P1": "administrative territorial entity in which the subject is located",
        "P2": "larger entity of which the subject is a part",
        "P3": "place where the person lives or has lived",
        "P4": "organization, club or society the subject belongs to",
        "P5": "person or organization for which the subject works",
        "P6": "educational institution attended by the subject",
        "P7": "award or recognition received by a person or organization",
        "P8": "person, idea or work that informed the subject",
        "P9": "administrative body with which the subject has a twinning arrangement",
        "P10": "founder or co-founder of this organization or place",
        "P11": "entity that inspired the subject's name",
        "P12": "first or given name of this person",
        "P13": "date on which the subject was born",
        "P14": "time when the subject came into existence",
        "P15": "number of people inhabiting the place",
        "P16": "specialization of a person, e.g. a particular area of craft",
        "P17": "entity that grants or presents the award",
    })
}

pub struct FixtureOptions {
    pub seed: u64,
    pub communities: usize,
    pub people_per_community: usize,
}

impl Default for FixtureOptions {
    fn default() -> Self {
        FixtureOptions { seed: 2024, communities: 8, people_per_community: 80 }
    }
}

/// Generate the fixture graph. Same options, same bytes.
pub fn generate(options: &FixtureOptions) -> FixtureKg {
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(options.seed),
        entities: Vec::new(),
        facts: Vec::new(),
        next_id: 1000,
    };

    // Denylist anchors with their conventional ids.
    {
        let calendar = json!({
            "id": "Q577", "label": "calendar year", "aliases": [],
            "instance_of": [], "flags": [],
        });
        let category = json!({
            "id": "Q4167836", "label": "site category", "aliases": [],
            "instance_of": [], "flags": [],
        });
        b.entities.push(calendar);
        b.entities.push(category);
    }

    // Shared type entities (lowercase labels, so never renamed).
    let t_country = b.entity("country", &[], &[]);
    let t_person = b.entity("person", &[], &[]);
    let t_given = b.entity("given name", &[], &[]);
    let t_club = b.entity("sports club", &[], &[]);
    let t_award = b.entity("award", &[], &[]);
    let t_org = b.entity("organization", &[], &[]);
    let t_institute = b.entity("research institute", &[], &[]);
    let t_field = b.entity("field of study", &[], &[]);

    // The country and its regions; the region type embeds the country name,
    // exercising recursive type resolution.
    let country_label = "Doriath".to_string();
    let country = b.entity(&country_label, &[t_country.as_str()], &[]);
    let t_region = b.entity(&format!("province of {country_label}"), &[], &[]);

    let mut all_cities: Vec<String> = Vec::new();
    let mut seeds: Vec<EntityId> = Vec::new();
    let mut hub_orgs: Vec<String> = Vec::new();

    struct Community {
        people: Vec<String>,
        clubs: Vec<String>,
    }

    let mut communities: Vec<Community> = Vec::new();

    for c in 0..options.communities {
        let region_label = format!("{}{}", b.word(), " Reach");
        let region = b.entity(&region_label, &[t_region.as_str()], &[]);
        b.fact(&region, PART_OF, &country);
        if c < 2 {
            seeds.push(EntityId::new(region.clone()));
        }

        // The city type embeds the region name: depth-3 resolution chain.
        let t_city = b.entity(&format!("city in {region_label}"), &[], &[]);

        let mut cities = Vec::new();
        let mut city_labels = Vec::new();
        for _ in 0..6 {
            let label = format!("{}{}", b.word(), b.rng.gen_range(0..3usize).checked_sub(1).map(|_| "ia").unwrap_or(""));
            let city = b.entity(&label, &[t_city.as_str()], &[]);
            b.fact(&city, LOCATED_IN, &region);
            let inception = b.rng.gen_range(1100i64..1600);
            b.literal_fact(&city, INCEPTION, "timestamp", &format!("{inception:04}"));
            if b.rng.gen_bool(0.5) {
                let population = b.rng.gen_range(20_000i64..900_000);
                b.literal_fact(&city, POPULATION, "quantity", &population.to_string());
            }
            cities.push(city);
            city_labels.push(label);
        }

        // Clubs; two carry a city name as a whole-word prefix, forming
        // name-dependency edges through their location facts.
        let mut clubs = Vec::new();
        for i in 0..4 {
            let (label, home) = if i < 2 {
                (format!("{} Rovers", city_labels[i]), i)
            } else {
                (format!("{} Athletic", b.word()), i)
            };
            let club = b.entity(&label, &[t_club.as_str()], &[]);
            b.fact(&club, LOCATED_IN, &cities[home]);
            clubs.push(club);
        }

        let mut orgs = Vec::new();
        for _ in 0..8 {
            let label = format!("{} Assembly", b.word());
            let org = b.entity(&label, &[t_org.as_str()], &[]);
            let at = b.rng.gen_range(0..cities.len());
            b.fact(&org, LOCATED_IN, &cities[at]);
            orgs.push(org);
        }
        hub_orgs.push(orgs[0].clone());

        let mut awards = Vec::new();
        for _ in 0..6 {
            let label = format!("The {} Prize", b.word());
            let award = b.entity(&label, &[t_award.as_str()], &[]);
            let by = b.rng.gen_range(0..orgs.len());
            b.fact(&award, CONFERRED_BY, &orgs[by]);
            awards.push(award);
        }

        let mut concepts = Vec::new();
        for i in 0..2 {
            let label = LOWER_WORDS[(c * 2 + i) % LOWER_WORDS.len()];
            concepts.push(b.entity(label, &[t_field.as_str()], &[]));
        }

        // Three-level name chains: given name, person carrying it, institute
        // named after the person.
        let mut institutes = Vec::new();
        let mut chain_people = Vec::new();
        for _ in 0..2 {
            let given_label = b.word();
            let given = b.entity(&given_label, &[t_given.as_str()], &[]);
            let family = b.word();
            let person_label = format!("{given_label} {family}");
            let person = b.entity(&person_label, &[t_person.as_str()], &[family.as_str()]);
            b.fact(&person, GIVEN_NAME, &given);
            let date = b.date(1820, 1975);
            b.literal_fact(&person, DATE_OF_BIRTH, "timestamp", &date);
            let institute_label = format!("{person_label} Institute");
            let institute = b.entity(&institute_label, &[t_institute.as_str()], &[]);
            b.fact(&institute, NAMED_AFTER, &person);
            let at = b.rng.gen_range(0..cities.len());
            b.fact(&institute, LOCATED_IN, &cities[at]);
            let founder_year = b.rng.gen_range(1800i64..1960);
            b.fact_with_year(&institute, FOUNDED_BY, &person, founder_year);
            institutes.push(institute);
            chain_people.push(person);
        }

        let mut people = chain_people;
        while people.len() < options.people_per_community {
            let label = format!("{} {}", b.word(), b.word());
            let alias: String = label.split(' ').next_back().unwrap_or_default().to_string();
            let person = b.entity(&label, &[t_person.as_str()], &[alias.as_str()]);
            people.push(person);
        }

        for i in 0..people.len() {
            let person = people[i].clone();
            let at = b.rng.gen_range(0..cities.len());
            b.fact(&person, RESIDENCE, &cities[at]);
            let org = b.rng.gen_range(0..orgs.len());
            b.fact(&person, EMPLOYER, &orgs[org]);
            let school = b.rng.gen_range(0..institutes.len() + orgs.len());
            if school < institutes.len() {
                b.fact(&person, EDUCATED_AT, &institutes[school]);
            } else {
                b.fact(&person, EDUCATED_AT, &orgs[school - institutes.len()]);
            }
            for _ in 0..2 {
                let other = b.rng.gen_range(0..people.len());
                if other != i {
                    let target = people[other].clone();
                    b.fact(&person, INFLUENCED_BY, &target);
                }
            }
            if b.rng.gen_bool(0.7) {
                let award = b.rng.gen_range(0..awards.len());
                let year = b.rng.gen_range(1900i64..1979);
                let target = awards[award].clone();
                b.fact_with_year(&person, AWARD_RECEIVED, &target, year);
            }
            if b.rng.gen_bool(0.4) {
                let club = b.rng.gen_range(0..clubs.len());
                let target = clubs[club].clone();
                b.fact(&person, MEMBER_OF, &target);
            }
            if b.rng.gen_bool(0.3) {
                let concept = b.rng.gen_range(0..concepts.len());
                let target = concepts[concept].clone();
                b.fact(&person, FIELD_OF_WORK, &target);
            }
            if b.rng.gen_bool(0.6) {
                let date = b.date(1820, 1975);
                b.literal_fact(&person, DATE_OF_BIRTH, "timestamp", &date);
            }
        }

        all_cities.extend(cities.iter().cloned());
        communities.push(Community { people, clubs });
    }

    // Cross-community stitching: twinned cities with dates, influence links,
    // and awards conferred across the seam.
    let n_cities = all_cities.len();
    for i in 0..n_cities {
        for _ in 0..2 {
            let j = b.rng.gen_range(0..n_cities);
            if i != j {
                let a = all_cities[i].clone();
                let t = all_cities[j].clone();
                let date = b.date(1860, 1980);
                b.facts.push(json!({
                    "subject": a,
                    "property": TWINNED_WITH.0,
                    "property_label": TWINNED_WITH.1,
                    "object": {"entity": t},
                    "qualifiers": [{
                        "property": "P585",
                        "property_label": "point in time",
                        "literal": {"kind": "timestamp", "value": date},
                    }],
                }));
            }
        }
    }
    for c in 0..communities.len() {
        for _ in 0..6 {
            let other = (c + 1 + b.rng.gen_range(0..communities.len() - 1)) % communities.len();
            let from = b.rng.gen_range(0..communities[c].people.len());
            let to = b.rng.gen_range(0..communities[other].people.len());
            let subject = communities[c].people[from].clone();
            let object = communities[other].people[to].clone();
            b.fact(&subject, INFLUENCED_BY, &object);
        }
        // A couple of club cross-memberships keep clubs in the core.
        for _ in 0..3 {
            let from = b.rng.gen_range(0..communities[c].people.len());
            let club = b.rng.gen_range(0..communities[c].clubs.len());
            let subject = communities[c].people[from].clone();
            let object = communities[c].clubs[club].clone();
            b.fact(&subject, MEMBER_OF, &object);
        }
    }

    // Junk that the entity filter must drop.
    for year in 1950..1980 {
        let label = year.to_string();
        let id = b.fresh_id();
        b.entities.push(json!({
            "id": id, "label": label, "aliases": [], "instance_of": ["Q577"], "flags": [],
        }));
        let city = all_cities[b.rng.gen_range(0..n_cities)].clone();
        b.fact(&city, ("P18", "significant year"), &id);
    }
    for i in 0..10 {
        let id = b.fresh_id();
        b.entities.push(json!({
            "id": id,
            "label": format!("Catalog:{}{i}", "Holding"),
            "aliases": [], "instance_of": ["Q4167836"], "flags": [],
        }));
    }
    for _ in 0..5 {
        b.droppable();
    }
    for i in 0..10 {
        let label = format!("Sector {i}");
        b.entity(&label, &[], &[]);
    }

    let mut entities_jsonl = String::new();
    for e in &b.entities {
        let _ = writeln!(entities_jsonl, "{e}");
    }
    let mut facts_jsonl = String::new();
    for f in &b.facts {
        let _ = writeln!(facts_jsonl, "{f}");
    }
    FixtureKg {
        entities_jsonl,
        facts_jsonl,
        relations_json: serde_json::to_string_pretty(&relation_defs()).expect("serialize defs"),
        suggested_seeds: seeds,
    }
}
