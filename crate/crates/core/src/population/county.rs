use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

pub const HEADER: [&str; 10] = [
    "county_id",
    "name",
    "real_population",
    "households_real",
    "avg_household_size",
    "grocery",
    "supercenter",
    "convenience",
    "schools",
    "workplaces",
];

const BUNDLED: &str = include_str!("../../data/tristate_counties.csv");

/// One row of the county table. Site counts are used as-is; household counts
/// are scaled during synthesis.
#[derive(Debug, Clone, PartialEq)]
pub struct CountyProfile {
    pub county_id: u16,
    pub name: String,
    pub real_population: u64,
    pub households_real: u64,
    pub avg_household_size: f64,
    pub grocery_count: u32,
    pub supercenter_count: u32,
    pub convenience_count: u32,
    pub school_count: u32,
    pub workplace_count: u32,
}

impl CountyProfile {
    pub fn validate(&self) -> Result<()> {
        if self.real_population == 0 {
            return Err(Error::invalid("real_population", "must be positive"));
        }
        if !(1.0..=10.0).contains(&self.avg_household_size) {
            return Err(Error::invalid("avg_household_size", "must lie in [1, 10]"));
        }
        Ok(())
    }
}

/// The 19-county tri-state table shipped with the crate.
pub fn bundled_county_table() -> Result<Vec<CountyProfile>> {
    parse_county_table(BUNDLED.as_bytes(), Path::new("<bundled>"))
}

pub fn load_county_table(path: impl AsRef<Path>) -> Result<Vec<CountyProfile>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_county_table(file, path)
}

/// Parses a county table; `origin` only labels errors.
pub fn parse_county_table(reader: impl Read, origin: &Path) -> Result<Vec<CountyProfile>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::csv(origin, e))?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::InvalidValue {
            row: 0,
            field: "header",
            reason: format!("expected `{}`", HEADER.join(",")),
        });
    }

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::InvalidValue {
            row,
            field: "row",
            reason: e.to_string(),
        })?;
        let field = |idx: usize| rec.get(idx).unwrap_or_default();
        let count = |idx: usize| -> Result<u64> {
            let name = HEADER[idx];
            let v: i64 = field(idx).parse().map_err(|_| Error::InvalidValue {
                row,
                field: name,
                reason: format!("`{}` is not an integer", field(idx)),
            })?;
            u64::try_from(v).map_err(|_| Error::InvalidValue {
                row,
                field: name,
                reason: format!("negative count {v}"),
            })
        };
        let small = |idx: usize| -> Result<u32> {
            u32::try_from(count(idx)?).map_err(|_| Error::InvalidValue {
                row,
                field: HEADER[idx],
                reason: "count too large".into(),
            })
        };

        let county_id = u16::try_from(count(0)?).map_err(|_| Error::InvalidValue {
            row,
            field: "county_id",
            reason: "must fit in 16 bits".into(),
        })?;
        let real_population = count(2)?;
        if real_population == 0 {
            return Err(Error::InvalidValue {
                row,
                field: "real_population",
                reason: "must be positive".into(),
            });
        }
        let avg_household_size: f64 = field(4).parse().map_err(|_| Error::InvalidValue {
            row,
            field: "avg_household_size",
            reason: format!("`{}` is not a number", field(4)),
        })?;
        if !(1.0..=10.0).contains(&avg_household_size) {
            return Err(Error::InvalidValue {
                row,
                field: "avg_household_size",
                reason: format!("{avg_household_size} outside [1, 10]"),
            });
        }

        out.push(CountyProfile {
            county_id,
            name: field(1).to_string(),
            real_population,
            households_real: count(3)?,
            avg_household_size,
            grocery_count: small(5)?,
            supercenter_count: small(6)?,
            convenience_count: small(7)?,
            school_count: small(8)?,
            workplace_count: small(9)?,
        });
    }

    if out.is_empty() {
        return Err(Error::EmptyTable {
            path: origin.to_path_buf(),
        });
    }
    Ok(out)
}
