//! Report assembly and rendering. Reports are built as ordered sections of
//! named fields and tables, then rendered either as structured text or as
//! flat tab-separated rows. Floats print with 17 significant digits so the
//! files round-trip double precision exactly, and checked quantities always
//! carry the tolerance they were compared against. Rendering never walks an
//! unordered container, so identical inputs give identical bytes.

use std::fmt::Write as _;

pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone)]
pub enum Field {
    Text {
        name: String,
        value: String,
    },
    Integer {
        name: String,
        value: i64,
    },
    /// A measured number; `tol` is the tolerance it was checked against,
    /// when the field is a checked quantity rather than a plain output.
    Number {
        name: String,
        value: f64,
        tol: Option<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct Section {
    pub title: String,
    pub fields: Vec<Field>,
    pub tables: Vec<Table>,
}

impl Section {
    pub fn new(title: &str) -> Section {
        Section {
            title: title.to_string(),
            fields: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn text(&mut self, name: &str, value: &str) -> &mut Self {
        self.fields.push(Field::Text {
            name: name.to_string(),
            value: value.to_string(),
        });
        self
    }

    pub fn integer(&mut self, name: &str, value: i64) -> &mut Self {
        self.fields.push(Field::Integer {
            name: name.to_string(),
            value,
        });
        self
    }

    pub fn number(&mut self, name: &str, value: f64) -> &mut Self {
        self.fields.push(Field::Number {
            name: name.to_string(),
            value,
            tol: None,
        });
        self
    }

    pub fn checked(&mut self, name: &str, value: f64, tol: f64) -> &mut Self {
        self.fields.push(Field::Number {
            name: name.to_string(),
            value,
            tol: Some(tol),
        });
        self
    }

    pub fn table(&mut self, table: Table) -> &mut Self {
        self.tables.push(table);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub sections: Vec<Section>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Structured,
    Tabular,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            command: command.to_string(),
            sections: Vec::new(),
        }
    }

    pub fn section(&mut self, section: Section) -> &mut Self {
        self.sections.push(section);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Structured => self.render_structured(),
            Format::Tabular => self.render_tabular(),
        }
    }

    fn render_structured(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "report = {}", self.command);
        for section in &self.sections {
            let _ = writeln!(out);
            let _ = writeln!(out, "[{}]", section.title);
            for field in &section.fields {
                match field {
                    Field::Text { name, value } => {
                        let _ = writeln!(out, "{name} = {value}");
                    }
                    Field::Integer { name, value } => {
                        let _ = writeln!(out, "{name} = {value}");
                    }
                    Field::Number { name, value, tol } => match tol {
                        None => {
                            let _ = writeln!(out, "{name} = {}", fmt_float(*value));
                        }
                        Some(t) => {
                            let _ = writeln!(
                                out,
                                "{name} = {} tol = {}",
                                fmt_float(*value),
                                fmt_float(*t)
                            );
                        }
                    },
                }
            }
            for table in &section.tables {
                let _ = writeln!(out);
                let _ = writeln!(
                    out,
                    "[{}.{}] columns = {}",
                    section.title,
                    table.name,
                    table.columns.join(" ")
                );
                for row in &table.rows {
                    let cells: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
                    let _ = writeln!(out, "{}", cells.join(" "));
                }
            }
        }
        out
    }

    fn render_tabular(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# report\t{}", self.command);
        for section in &self.sections {
            for field in &section.fields {
                match field {
                    Field::Text { name, value } => {
                        let _ = writeln!(out, "{}\t{name}\t{value}\t", section.title);
                    }
                    Field::Integer { name, value } => {
                        let _ = writeln!(out, "{}\t{name}\t{value}\t", section.title);
                    }
                    Field::Number { name, value, tol } => {
                        let tol_cell = tol.map(fmt_float).unwrap_or_default();
                        let _ = writeln!(
                            out,
                            "{}\t{name}\t{}\t{tol_cell}",
                            section.title,
                            fmt_float(*value)
                        );
                    }
                }
            }
            for table in &section.tables {
                let _ = writeln!(
                    out,
                    "# table\t{}.{}\t{}",
                    section.title,
                    table.name,
                    table.columns.join("\t")
                );
                for row in &table.rows {
                    let cells: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
                    let _ = writeln!(
                        out,
                        "{}.{}\t{}",
                        section.title,
                        table.name,
                        cells.join("\t")
                    );
                }
            }
        }
        out
    }
}

/// One line of the verification ledger.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub suite: String,
    pub check: String,
    pub defect: f64,
    pub tol: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.defect <= self.tol
    }

    pub fn render(&self) -> String {
        format!(
            "{} {}.{} defect={} tol={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.check,
            fmt_float(self.defect),
            fmt_float(self.tol)
        )
    }
}
