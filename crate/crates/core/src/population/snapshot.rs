//! Population snapshot as three CSV files. Friend and resident lists are
//! `;`-joined id lists in a single column.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    AgeBin, Household, HouseholdId, Person, PersonId, Population, Sex, Site, SiteId, SiteKind,
};
use crate::disease::{HealthState, Stage};
use crate::error::{Error, Result};

pub const SITES_FILE: &str = "sites.csv";
pub const HOUSEHOLDS_FILE: &str = "households.csv";
pub const PEOPLE_FILE: &str = "people.csv";

#[derive(Serialize, Deserialize)]
struct SiteRow {
    site_id: u32,
    kind: String,
    county_id: u16,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct HouseholdRow {
    household_id: u32,
    county_id: u16,
    home_site: u32,
    residents: String,
    friends: String,
    grocery: u32,
    supercenter: u32,
    convenience: u32,
    workplace: u32,
    school: u32,
}

#[derive(Serialize, Deserialize)]
struct PersonRow {
    person_id: u32,
    household_id: u32,
    age_years: u8,
    age_bin: String,
    sex: String,
    employed: bool,
    school_site: Option<u32>,
    essential: bool,
    health: String,
    days_in_stage: u16,
}

fn join(ids: impl Iterator<Item = u32>) -> String {
    ids.map(|i| i.to_string()).collect::<Vec<_>>().join(";")
}

fn split(file: &'static str, row: usize, s: &str) -> Result<Vec<u32>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|t| {
            t.parse().map_err(|_| Error::Snapshot {
                file,
                row,
                reason: format!("bad id `{t}` in list"),
            })
        })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: impl Iterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::csv(path, e))
}

pub fn write_snapshot(pop: &Population, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    write_rows(
        &dir.join(SITES_FILE),
        pop.sites.iter().map(|s| SiteRow {
            site_id: s.id.0,
            kind: s.kind.label().to_string(),
            county_id: s.county_id,
            x: s.x,
            y: s.y,
        }),
    )?;
    write_rows(
        &dir.join(HOUSEHOLDS_FILE),
        pop.households.iter().map(|h| HouseholdRow {
            household_id: h.id.0,
            county_id: h.county_id,
            home_site: h.home_site.0,
            residents: join(h.residents.iter().map(|p| p.0)),
            friends: join(h.friends.iter().map(|f| f.0)),
            grocery: h.grocery.0,
            supercenter: h.supercenter.0,
            convenience: h.convenience.0,
            workplace: h.workplace.0,
            school: h.school.0,
        }),
    )?;
    write_rows(
        &dir.join(PEOPLE_FILE),
        pop.people.iter().map(|p| PersonRow {
            person_id: p.id.0,
            household_id: p.household.0,
            age_years: p.age_years,
            age_bin: p.age_bin.label().to_string(),
            sex: p.sex.label().to_string(),
            employed: p.employed,
            school_site: p.school_site.map(|s| s.0),
            essential: p.essential,
            health: p.health.stage.label().to_string(),
            days_in_stage: p.health.days_in_stage,
        }),
    )
}

/// Reads and validates a snapshot directory.
pub fn read_snapshot(dir: impl AsRef<Path>) -> Result<Population> {
    let dir = dir.as_ref();
    let bad = |file, row, reason: String| Error::Snapshot { file, row, reason };

    let sites = read_rows::<SiteRow>(&dir.join(SITES_FILE))?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(Site {
                id: SiteId(r.site_id),
                kind: SiteKind::parse(&r.kind)
                    .ok_or_else(|| bad(SITES_FILE, i, format!("unknown kind `{}`", r.kind)))?,
                county_id: r.county_id,
                x: r.x,
                y: r.y,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let households = read_rows::<HouseholdRow>(&dir.join(HOUSEHOLDS_FILE))?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(Household {
                id: HouseholdId(r.household_id),
                county_id: r.county_id,
                home_site: SiteId(r.home_site),
                residents: split(HOUSEHOLDS_FILE, i, &r.residents)?
                    .into_iter()
                    .map(PersonId)
                    .collect(),
                friends: split(HOUSEHOLDS_FILE, i, &r.friends)?
                    .into_iter()
                    .map(HouseholdId)
                    .collect(),
                grocery: SiteId(r.grocery),
                supercenter: SiteId(r.supercenter),
                convenience: SiteId(r.convenience),
                workplace: SiteId(r.workplace),
                school: SiteId(r.school),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let people = read_rows::<PersonRow>(&dir.join(PEOPLE_FILE))?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(Person {
                id: PersonId(r.person_id),
                household: HouseholdId(r.household_id),
                age_years: r.age_years,
                age_bin: AgeBin::parse(&r.age_bin)
                    .ok_or_else(|| bad(PEOPLE_FILE, i, format!("unknown age bin `{}`", r.age_bin)))?,
                sex: Sex::parse(&r.sex)
                    .ok_or_else(|| bad(PEOPLE_FILE, i, format!("unknown sex `{}`", r.sex)))?,
                employed: r.employed,
                school_site: r.school_site.map(SiteId),
                health: HealthState {
                    stage: Stage::parse(&r.health).ok_or_else(|| {
                        bad(PEOPLE_FILE, i, format!("unknown health stage `{}`", r.health))
                    })?,
                    days_in_stage: r.days_in_stage,
                },
                essential: r.essential,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let pop = Population {
        sites,
        households,
        people,
    };
    pop.validate()?;
    Ok(pop)
}
