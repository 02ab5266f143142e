//! The slope/recovery regulation table and its compilation into rules.

use std::fmt;

use thiserror::Error;

use super::sbvr::SbvrRule;
use super::{rulebase_prefixes, Rule, RuleMetadata};
use crate::kgstore::Iri;
use crate::query::parse_query;
use crate::text::canonical_label;
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("column header `{0}` names no (zone, situation) pair")]
    Header(String),
    #[error("column {0} appears twice")]
    DuplicateColumn(Column),
    #[error("table has no rows or no columns")]
    Empty,
    #[error("slope {next}% does not follow {prev}% in increasing order")]
    SlopeOrder { prev: u32, next: u32 },
    #[error("column {column}: recovery rises from {prev} cm to {next} cm at slope {slope}%")]
    RecoveryIncreases { column: Column, slope: u32, prev: u32, next: u32 },
    #[error("cell ({slope}%, {column}) must be a positive number of centimetres")]
    BadCell { slope: u32, column: Column },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Zone {
    I,
    II,
    III,
}

impl Zone {
    pub fn number(self) -> u8 {
        match self {
            Zone::I => 1,
            Zone::II => 2,
            Zone::III => 3,
        }
    }

    pub fn roman(self) -> &'static str {
        match self {
            Zone::I => "I",
            Zone::II => "II",
            Zone::III => "III",
        }
    }

    fn from_word(w: &str) -> Option<Zone> {
        match w {
            "i" | "1" => Some(Zone::I),
            "ii" | "2" => Some(Zone::II),
            "iii" | "3" => Some(Zone::III),
            _ => None,
        }
    }

    /// Concept for tiles' areas in this zone, e.g. `dt:Zone1`.
    pub fn concept(self) -> Iri {
        Iri::new(vocab::dt(&format!("Zone{}", self.number()))).expect("valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Situation {
    Protected,
    Normal,
    Exposed,
}

impl Situation {
    pub fn label(self) -> &'static str {
        match self {
            Situation::Protected => "protected",
            Situation::Normal => "normal",
            Situation::Exposed => "exposed",
        }
    }

    /// Accepts the printed abbreviations alongside the normalized names.
    fn from_word(w: &str) -> Option<Situation> {
        match w {
            "protected" | "protege" | "plat" | "abrite" => Some(Situation::Protected),
            "normal" | "normale" => Some(Situation::Normal),
            "exposed" | "expose" | "excent" | "exposee" => Some(Situation::Exposed),
            _ => None,
        }
    }

    pub fn concept(self) -> Iri {
        let local = match self {
            Situation::Protected => "Protected",
            Situation::Normal => "Normal",
            Situation::Exposed => "Exposed",
        };
        Iri::new(vocab::dt(local)).expect("valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Column {
    pub zone: Zone,
    pub situation: Situation,
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.zone.roman(), self.situation.label())
    }
}

impl Column {
    fn parse(header: &str) -> Result<Column, TableError> {
        let canonical = canonical_label(header);
        let words: Vec<&str> = canonical.split(' ').filter(|w| *w != "zone").collect();
        let zone = words.iter().find_map(|w| Zone::from_word(w));
        let situation = words.iter().find_map(|w| Situation::from_word(w));
        match (zone, situation) {
            (Some(zone), Some(situation)) => Ok(Column { zone, situation }),
            _ => Err(TableError::Header(header.to_owned())),
        }
    }
}

/// Minimum recovery in centimetres, indexed by slope row and
/// (zone, situation) column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeTable {
    rows: Vec<u32>,
    columns: Vec<Column>,
    cells: Vec<Vec<u32>>,
}

fn leading_number(s: &str) -> Option<u32> {
    let digits: String = s.trim().chars().take_while(char::is_ascii_digit).collect();
    let rest = s.trim()[digits.len()..].trim();
    if !rest.is_empty() && !matches!(rest, "%" | "cm") {
        return None;
    }
    digits.parse().ok()
}

impl SlopeTable {
    /// Validates that slopes strictly increase, columns are distinct, and
    /// recovery never increases down a column.
    pub fn new(rows: Vec<u32>, columns: Vec<Column>, cells: Vec<Vec<u32>>) -> Result<Self, TableError> {
        if rows.is_empty() || columns.is_empty() {
            return Err(TableError::Empty);
        }
        for pair in rows.windows(2) {
            if pair[1] <= pair[0] {
                return Err(TableError::SlopeOrder { prev: pair[0], next: pair[1] });
            }
        }
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].contains(c) {
                return Err(TableError::DuplicateColumn(*c));
            }
        }
        assert_eq!(cells.len(), rows.len(), "one cell row per slope");
        for (r, row) in cells.iter().enumerate() {
            assert_eq!(row.len(), columns.len(), "one cell per column");
            for (c, &v) in row.iter().enumerate() {
                if v == 0 {
                    return Err(TableError::BadCell { slope: rows[r], column: columns[c] });
                }
                if r > 0 && v > cells[r - 1][c] {
                    return Err(TableError::RecoveryIncreases {
                        column: columns[c],
                        slope: rows[r],
                        prev: cells[r - 1][c],
                        next: v,
                    });
                }
            }
        }
        Ok(SlopeTable { rows, columns, cells })
    }

    /// Reads a delimiter-separated table: `#` comments, a header row whose
    /// first cell is ignored and whose other cells name (zone, situation)
    /// pairs, then one row per slope. The delimiter (`;`, tab or `,`) is
    /// taken from the header row.
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let header_line = text
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#'))
            .ok_or(TableError::Empty)?;
        let delimiter = b";\t,"
            .iter()
            .copied()
            .find(|d| header_line.as_bytes().contains(d))
            .ok_or_else(|| TableError::Header(header_line.to_owned()))?;
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .comment(Some(b'#'))
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());

        let mut records = reader.records();
        let syntax = |line: u64, message: String| TableError::Syntax { line: line as usize, message };
        let header = records.next().ok_or(TableError::Empty)?.map_err(|e| syntax(0, e.to_string()))?;
        let columns = header.iter().skip(1).map(Column::parse).collect::<Result<Vec<_>, _>>()?;

        let mut rows = Vec::new();
        let mut cells = Vec::new();
        for record in records {
            let record = record.map_err(|e| syntax(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.iter().all(str::is_empty) {
                continue;
            }
            if record.len() != columns.len() + 1 {
                return Err(syntax(line, format!("expected {} cells, found {}", columns.len() + 1, record.len())));
            }
            let slope = leading_number(&record[0]).ok_or_else(|| syntax(line, format!("bad slope `{}`", &record[0])))?;
            let row = record
                .iter()
                .skip(1)
                .map(|cell| leading_number(cell).ok_or_else(|| syntax(line, format!("bad recovery `{cell}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(slope);
            cells.push(row);
        }
        SlopeTable::new(rows, columns, cells)
    }

    pub fn slopes(&self) -> &[u32] {
        &self.rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    /// Required recovery for an exact slope row and column.
    pub fn lookup(&self, slope: u32, zone: Zone, situation: Situation) -> Option<u32> {
        let r = self.rows.iter().position(|&s| s == slope)?;
        let c = self.columns.iter().position(|c| c.zone == zone && c.situation == situation)?;
        Some(self.cells[r][c])
    }

    /// Every `(slope, column, required recovery)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (u32, Column, u32)> + '_ {
        self.rows.iter().enumerate().flat_map(move |(r, &slope)| {
            self.columns.iter().enumerate().map(move |(c, &col)| (slope, col, self.cells[r][c]))
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("slope");
        for c in &self.columns {
            out.push(';');
            out.push_str(&c.to_string());
        }
        out.push('\n');
        for (r, slope) in self.rows.iter().enumerate() {
            out.push_str(&slope.to_string());
            for v in &self.cells[r] {
                out.push(';');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Local name shared by a cell rule and its SBVR node, e.g. `P70_ZI_protected`.
pub fn cell_rule_name(slope: u32, column: Column) -> String {
    format!("P{slope}_Z{}_{}", column.zone.roman(), column.situation.label())
}

pub fn cell_rule_iri(slope: u32, column: Column) -> Iri {
    Iri::new(format!("{}{}", vocab::RULES, cell_rule_name(slope, column))).expect("valid")
}

pub fn coverage_rule_iri() -> Iri {
    Iri::new(format!("{}SlopeCoverage", vocab::RULES)).expect("valid")
}

fn tile() -> Iri {
    Iri::new(vocab::dt("Tile")).expect("valid")
}

fn cell_rule(slope: u32, column: Column, recovery: u32, meta: &RuleMetadata) -> Rule {
    let name = cell_rule_name(slope, column);
    let id = Iri::new(format!("{}{name}", vocab::RULES)).expect("valid");
    let sbvr_id = Iri::new(format!("{}{name}", vocab::SBVR)).expect("valid");
    let annotated = format!(
        "If a [C:tile] is built in [C:Zone {}] and [P:has situation] equal to [C:{}] and [P:has slope] equal to [L:{slope}%] then it must [P:have recovery] at least [L:{recovery} cm]",
        column.zone.number(),
        column.situation.label(),
    );
    let query = format!(
        "ASK {{
  ?x rdf:type dt:Tile
  ?x dt:hasSlope ?sl
  ?x dt:hasArea ?z
  ?z rdf:type dt:Zone{zone}
  ?z dt:hasSituation ?s
  ?s rdf:type dt:{situation}
  FILTER (?sl = {slope})
  MINUS {{
    ?x dt:hasRecovery ?r
    FILTER (xsd:integer(?r) >= {recovery})
  }}
}}",
        zone = column.zone.number(),
        situation = column.situation.concept().local_name(),
    );
    build_rule(id, sbvr_id, &annotated, &query, meta)
}

fn build_rule(id: Iri, sbvr_id: Iri, annotated: &str, query: &str, meta: &RuleMetadata) -> Rule {
    let mut sbvr = SbvrRule::from_annotated(sbvr_id, annotated).expect("generated markup is well formed");
    sbvr.source_doc = meta.source_doc.clone();
    sbvr.domain_tag = meta.domain_tag.clone();
    sbvr.theme_tag = meta.theme_tag.clone();
    Rule {
        id,
        sbvr,
        violation_query: parse_query(query, &rulebase_prefixes()).expect("generated query parses"),
        applies_to: tile(),
    }
}

/// One rule per table cell, row by row. A rule's violation query holds for a
/// tile at the cell's slope, zone and situation whose recovery is below the
/// cell value or missing.
pub fn compile_table(table: &SlopeTable, meta: &RuleMetadata) -> Vec<Rule> {
    table
        .cells()
        .map(|(slope, column, recovery)| cell_rule(slope, column, recovery, meta))
        .collect()
}

/// The rule flagging tiles whose slope is not a row of the table, so no cell
/// rule applies to them.
pub fn coverage_rule(table: &SlopeTable, meta: &RuleMetadata) -> Rule {
    let listed: Vec<String> = table.slopes().iter().map(|s| format!("{s}%")).collect();
    let annotated = format!(
        "A [C:tile] must [P:have slope] equal to one of [L:{}] otherwise no applicable rule row covers it",
        listed.join(", ")
    );
    let filters: String = table
        .slopes()
        .iter()
        .map(|s| format!("  FILTER (?sl != {s})\n"))
        .collect();
    let query = format!("ASK {{\n  ?x rdf:type dt:Tile\n  ?x dt:hasSlope ?sl\n{filters}}}");
    let sbvr_id = Iri::new(format!("{}SlopeCoverage", vocab::SBVR)).expect("valid");
    build_rule(coverage_rule_iri(), sbvr_id, &annotated, &query, meta)
}
