//! Parser and emitter for the supported `CREATE TABLE` subset.
//!
//! Grammar:
//!
//! ```text
//! script  := { create } EOF
//! create  := CREATE TABLE ident '(' element { ',' element } ')' ';'
//! element := ident type { NOT NULL | PRIMARY KEY | UNIQUE }
//!          | PRIMARY KEY '(' idents ')'
//!          | FOREIGN KEY '(' idents ')' REFERENCES ident '(' idents ')'
//! type    := INTEGER | BIGINT | DECIMAL '(' p ',' s ')' | VARCHAR '(' n ')'
//!          | DATE | TIMESTAMP | BOOLEAN
//! ```
//!
//! Unquoted identifiers fold to lower case, double-quoted identifiers are kept
//! verbatim. `--` starts a line comment. Recognizable SQL outside the subset is
//! reported as [`CatalogError::UnsupportedFeature`].

use std::fmt::Write as _;

use super::{CatalogError, ColumnDef, FkDef, RelationalCatalog, TableDef};
use crate::value::DataType;

const DEFAULT_SCHEMA: &str = "default";

/// Keywords that make an otherwise plain identifier need quoting on emission.
const RESERVED: &[&str] = &[
    "create",
    "table",
    "primary",
    "foreign",
    "key",
    "references",
    "not",
    "null",
    "unique",
    "constraint",
    "check",
    "default",
];

/// Words that are valid SQL in a column or table definition but outside the subset.
const UNSUPPORTED_CLAUSES: &[&str] = &[
    "DEFAULT",
    "CHECK",
    "REFERENCES",
    "COLLATE",
    "AUTO_INCREMENT",
    "AUTOINCREMENT",
    "GENERATED",
    "IDENTITY",
    "CONSTRAINT",
    "NULL",
    "INDEX",
    "KEY",
    "ON",
    "MATCH",
    "DEFERRABLE",
    "COMMENT",
    "EXCLUDE",
];

/// Parses DDL text and validates the resulting catalog.
pub fn parse_ddl(text: &str) -> Result<RelationalCatalog, CatalogError> {
    parse_ddl_unchecked(text)?.into_valid()
}

/// Parses DDL text, applying only the structural catalog rules. Used where a
/// catalog with validation errors still has to be reported on.
pub fn parse_ddl_unchecked(text: &str) -> Result<RelationalCatalog, CatalogError> {
    let tokens = tokenize(text)?;
    let tables = Parser { tokens, pos: 0 }.script()?;
    RelationalCatalog::from_tables(DEFAULT_SCHEMA, tables)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident { text: String, quoted: bool },
    Number(String),
    Str,
    LParen,
    RParen,
    Comma,
    Semi,
    Other(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

impl Token {
    fn describe(&self) -> String {
        match &self.tok {
            Tok::Ident { text, quoted: true } => format!("\"{text}\""),
            Tok::Ident { text, .. } => format!("`{text}`"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Str => "string literal".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Semi => "`;`".to_string(),
            Tok::Other(c) => format!("`{c}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    /// Upper-cased keyword text for unquoted identifiers.
    fn keyword(&self) -> Option<String> {
        match &self.tok {
            Tok::Ident { text, quoted: false } => Some(text.to_ascii_uppercase()),
            _ => None,
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, CatalogError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! advance {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let push = |tokens: &mut Vec<Token>, tok| tokens.push(Token { tok, line: start_line, col: start_col });
        if c.is_whitespace() {
            advance!();
        } else if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                advance!();
            }
        } else if c == '"' || c == '\'' {
            advance!();
            let mut buf = String::new();
            loop {
                if i >= chars.len() {
                    let what = if c == '"' { "closing `\"`" } else { "closing `'`" };
                    return Err(CatalogError::Syntax {
                        line: start_line,
                        column: start_col,
                        expected: what.to_string(),
                        found: "end of input".to_string(),
                    });
                }
                if chars[i] == c {
                    if chars.get(i + 1) == Some(&c) {
                        buf.push(c);
                        advance!();
                        advance!();
                        continue;
                    }
                    advance!();
                    break;
                }
                buf.push(chars[i]);
                advance!();
            }
            if c == '\'' {
                push(&mut tokens, Tok::Str);
            } else if buf.is_empty() {
                return Err(CatalogError::Syntax {
                    line: start_line,
                    column: start_col,
                    expected: "identifier".to_string(),
                    found: "empty quoted identifier".to_string(),
                });
            } else {
                push(&mut tokens, Tok::Ident { text: buf, quoted: true });
            }
        } else if c.is_alphabetic() || c == '_' {
            let mut buf = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                buf.push(chars[i]);
                advance!();
            }
            push(&mut tokens, Tok::Ident { text: buf.to_lowercase(), quoted: false });
        } else if c.is_ascii_digit() {
            let mut buf = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                buf.push(chars[i]);
                advance!();
            }
            push(&mut tokens, Tok::Number(buf));
        } else {
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                other => Tok::Other(other),
            };
            push(&mut tokens, tok);
            advance!();
        }
    }
    tokens.push(Token { tok: Tok::Eof, line, col });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_at(&self, offset: usize) -> &Token {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, expected: &str) -> CatalogError {
        let t = self.peek();
        CatalogError::Syntax { line: t.line, column: t.col, expected: expected.to_string(), found: t.describe() }
    }

    fn unsupported(&self, feature: impl Into<String>) -> CatalogError {
        let t = self.peek();
        CatalogError::UnsupportedFeature { line: t.line, column: t.col, feature: feature.into() }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        self.peek().keyword().as_deref() == Some(kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), CatalogError> {
        if self.at_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(kw))
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), CatalogError> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(what))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, CatalogError> {
        match &self.peek().tok {
            Tok::Ident { text, .. } => {
                let text = text.clone();
                self.bump();
                Ok(text)
            }
            _ => Err(self.syntax(what)),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<String>, CatalogError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = vec![self.ident("column name")?];
        while self.peek().tok == Tok::Comma {
            self.bump();
            out.push(self.ident("column name")?);
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        Ok(out)
    }

    fn script(&mut self) -> Result<Vec<TableDef>, CatalogError> {
        let mut tables = Vec::new();
        loop {
            match &self.peek().tok {
                Tok::Eof => return Ok(tables),
                Tok::Semi => {
                    self.bump();
                }
                _ => tables.push(self.create_table()?),
            }
        }
    }

    fn create_table(&mut self) -> Result<TableDef, CatalogError> {
        match self.peek().keyword().as_deref() {
            Some("CREATE") => {}
            Some(kw @ ("ALTER" | "DROP" | "INSERT" | "UPDATE" | "DELETE" | "SELECT" | "GRANT" | "COMMENT" | "SET")) => {
                return Err(self.unsupported(format!("{kw} statements")));
            }
            _ => return Err(self.syntax("CREATE")),
        }
        self.bump();
        if !self.at_keyword("TABLE") {
            return match self.peek().keyword() {
                Some(kw) => Err(self.unsupported(format!("CREATE {kw}"))),
                None => Err(self.syntax("TABLE")),
            };
        }
        self.bump();
        if self.at_keyword("IF") {
            return Err(self.unsupported("IF NOT EXISTS"));
        }
        let name = self.ident("table name")?;
        if self.peek().tok == Tok::Other('.') {
            return Err(self.unsupported("schema-qualified table names"));
        }
        self.expect(Tok::LParen, "`(`")?;
        let mut table = TableDef { name, columns: Vec::new(), primary_key: Vec::new(), foreign_keys: Vec::new() };
        let mut pk_declared = false;
        loop {
            self.element(&mut table, &mut pk_declared)?;
            match self.peek().tok {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    break;
                }
                _ => {
                    return Err(match self.peek().keyword() {
                        Some(kw) if UNSUPPORTED_CLAUSES.contains(&kw.as_str()) => self.unsupported(kw),
                        _ => self.syntax("`,` or `)`"),
                    })
                }
            }
        }
        if table.columns.is_empty() {
            return Err(CatalogError::SchemaViolation(format!("table {} declares no columns", table.name)));
        }
        match &self.peek().tok {
            Tok::Semi => {
                self.bump();
            }
            Tok::Ident { quoted: false, .. } => return Err(self.unsupported("table options")),
            _ => return Err(self.syntax("`;`")),
        }
        for pk in &table.primary_key {
            if let Some(col) = table.columns.iter_mut().find(|c| &c.name == pk) {
                col.nullable = false;
            }
        }
        Ok(table)
    }

    fn element(&mut self, table: &mut TableDef, pk_declared: &mut bool) -> Result<(), CatalogError> {
        let next_is_key = self.peek_at(1).keyword().as_deref() == Some("KEY");
        match self.peek().keyword().as_deref() {
            Some("PRIMARY") if next_is_key => {
                self.bump();
                self.bump();
                if *pk_declared {
                    return Err(self.unsupported(format!("multiple primary keys for table {}", table.name)));
                }
                *pk_declared = true;
                table.primary_key = self.ident_list()?;
                return Ok(());
            }
            Some("FOREIGN") if next_is_key => {
                self.bump();
                self.bump();
                let columns = self.ident_list()?;
                self.expect_keyword("REFERENCES")?;
                let ref_table = self.ident("referenced table name")?;
                if self.peek().tok != Tok::LParen {
                    return Err(self.unsupported("foreign key without explicit referenced columns"));
                }
                let ref_columns = self.ident_list()?;
                if let Some(kw) = self.peek().keyword() {
                    if kw == "ON" || kw == "MATCH" || kw == "DEFERRABLE" {
                        return Err(self.unsupported(format!("foreign key {kw} clause")));
                    }
                }
                table.foreign_keys.push(FkDef { columns, ref_table, ref_columns });
                return Ok(());
            }
            Some(kw @ ("CONSTRAINT" | "CHECK" | "UNIQUE" | "INDEX" | "KEY" | "EXCLUDE")) => {
                return Err(self.unsupported(format!("{kw} table constraint")));
            }
            _ => {}
        }

        let name = self.ident("column name or table constraint")?;
        let data_type = self.data_type()?;
        let mut col = ColumnDef::new(name, data_type, true);
        loop {
            match self.peek().keyword().as_deref() {
                Some("NOT") if self.peek_at(1).keyword().as_deref() == Some("NULL") => {
                    self.bump();
                    self.bump();
                    col.nullable = false;
                }
                Some("PRIMARY") if self.peek_at(1).keyword().as_deref() == Some("KEY") => {
                    if *pk_declared {
                        return Err(self.unsupported(format!("multiple primary keys for table {}", table.name)));
                    }
                    self.bump();
                    self.bump();
                    *pk_declared = true;
                    col.nullable = false;
                    table.primary_key = vec![col.name.clone()];
                }
                Some("UNIQUE") => {
                    self.bump();
                    col.unique = true;
                }
                Some(kw) if UNSUPPORTED_CLAUSES.contains(&kw) => {
                    return Err(self.unsupported(format!("{kw} column constraint")));
                }
                _ => break,
            }
        }
        table.columns.push(col);
        Ok(())
    }

    fn data_type(&mut self) -> Result<DataType, CatalogError> {
        let (line, col) = (self.peek().line, self.peek().col);
        let Some(name) = self.peek().keyword() else {
            return Err(self.syntax("column type"));
        };
        if !matches!(name.as_str(), "INTEGER" | "BIGINT" | "DECIMAL" | "VARCHAR" | "DATE" | "TIMESTAMP" | "BOOLEAN") {
            return Err(self.unsupported(format!("type {name}")));
        }
        self.bump();
        let mut args = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.bump();
            loop {
                match &self.peek().tok {
                    Tok::Number(n) => {
                        let v = n.parse::<u64>().map_err(|_| self.unsupported(format!("type argument {n}")))?;
                        args.push(v);
                        self.bump();
                    }
                    _ => return Err(self.syntax("type argument")),
                }
                match self.peek().tok {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RParen => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.syntax("`,` or `)`")),
                }
            }
        }
        DataType::from_parts(&name, &args).map_err(|reason| CatalogError::UnsupportedFeature {
            line,
            column: col,
            feature: reason,
        })
    }
}

fn quote_ident(name: &str) -> String {
    let plain = name.chars().next().is_some_and(|c| c.is_ascii_lowercase() || c == '_')
        && name.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && !RESERVED.contains(&name);
    if plain {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('"', "\"\""))
    }
}

fn quote_list(names: &[String]) -> String {
    names.iter().map(|n| quote_ident(n)).collect::<Vec<_>>().join(", ")
}

/// Renders a catalog in the DDL subset. Parsing the output yields an equal catalog
/// (up to the schema name, which DDL does not carry).
pub fn emit_ddl(catalog: &RelationalCatalog) -> String {
    let mut out = String::new();
    for (i, table) in catalog.tables().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "CREATE TABLE {} (", quote_ident(&table.name));
        let mut lines = Vec::new();
        for col in &table.columns {
            let mut line = format!("    {} {}", quote_ident(&col.name), col.data_type);
            if !col.nullable {
                line.push_str(" NOT NULL");
            }
            if col.unique {
                line.push_str(" UNIQUE");
            }
            lines.push(line);
        }
        if !table.primary_key.is_empty() {
            lines.push(format!("    PRIMARY KEY ({})", quote_list(&table.primary_key)));
        }
        for fk in &table.foreign_keys {
            lines.push(format!(
                "    FOREIGN KEY ({}) REFERENCES {} ({})",
                quote_list(&fk.columns),
                quote_ident(&fk.ref_table),
                quote_list(&fk.ref_columns)
            ));
        }
        out.push_str(&lines.join(",\n"));
        out.push_str("\n);\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ConstraintClass;

    #[test]
    fn single_table_minimal_case() {
        let cat =
            parse_ddl("CREATE TABLE categories (category_id INTEGER PRIMARY KEY, category_name VARCHAR(40) NOT NULL);")
                .unwrap();
        assert_eq!(cat.tables().len(), 1);
        let t = &cat.tables()[0];
        assert_eq!(t.primary_key, vec!["category_id"]);
        assert!(!t.columns[0].nullable);
        assert_eq!(t.columns[0].constraint_class, ConstraintClass::Primary);
        assert_eq!(t.columns[1].data_type, DataType::Varchar(40));
    }

    #[test]
    fn float_is_unsupported_and_named() {
        let err = parse_ddl("CREATE TABLE t (a INTEGER PRIMARY KEY, b FLOAT);").unwrap_err();
        match err {
            CatalogError::UnsupportedFeature { feature, line, column } => {
                assert!(feature.contains("FLOAT"), "{feature}");
                assert_eq!((line, column), (1, 42));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejections_are_positioned() {
        let cases = [
            ("CREATE TABLE t (a INTEGER PRIMARY KEY, CHECK (a > 0));", "CHECK"),
            ("CREATE TABLE t (a INTEGER PRIMARY KEY DEFAULT 1);", "DEFAULT"),
            ("CREATE VIEW v AS SELECT 1;", "CREATE VIEW"),
            ("ALTER TABLE t ADD COLUMN b INTEGER;", "ALTER"),
            ("CREATE TABLE t (a DECIMAL(30,2) PRIMARY KEY);", "precision"),
            ("CREATE TABLE t (a INTEGER, PRIMARY KEY (a), PRIMARY KEY (a));", "multiple primary keys"),
        ];
        for (text, needle) in cases {
            match parse_ddl_unchecked(text) {
                Err(CatalogError::UnsupportedFeature { feature, .. }) => assert!(feature.contains(needle), "{feature}"),
                other => panic!("{text}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn syntax_errors_name_expected_token() {
        match parse_ddl("CREATE TABLE t (a INTEGER PRIMARY KEY)") {
            Err(CatalogError::Syntax { expected, found, .. }) => {
                assert_eq!(expected, "`;`");
                assert_eq!(found, "end of input");
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse_ddl("CREATE TABLE t (a INTEGER PRIMARY KEY,\n  b VARCHAR(") {
            Err(CatalogError::Syntax { line, expected, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(expected, "type argument");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_ddl("CREATE TABLE \"x (a INTEGER);"), Err(CatalogError::Syntax { .. })));
    }

    #[test]
    fn identifier_folding_and_quoting() {
        let cat = parse_ddl("create table Orders (\"Id\" integer primary key, Note varchar(10) unique);").unwrap();
        let t = &cat.tables()[0];
        assert_eq!(t.name, "orders");
        assert_eq!(t.columns[0].name, "Id");
        assert_eq!(t.columns[1].name, "note");
        assert_eq!(t.columns[1].constraint_class, ConstraintClass::Unique);
        let emitted = emit_ddl(&cat);
        assert!(emitted.contains("\"Id\" INTEGER NOT NULL"));
        assert_eq!(parse_ddl(&emitted).unwrap(), cat);
    }

    #[test]
    fn comments_and_table_level_keys() {
        let text = "-- header\nCREATE TABLE p (id INTEGER, PRIMARY KEY (id)); -- trailing\n\
                    CREATE TABLE c (id INTEGER PRIMARY KEY, p_id INTEGER, FOREIGN KEY (p_id) REFERENCES p (id));";
        let cat = parse_ddl(text).unwrap();
        assert_eq!(cat.tables().len(), 2);
        assert!(!cat.tables()[0].columns[0].nullable);
        assert_eq!(cat.tables()[1].columns[1].constraint_class, ConstraintClass::Foreign);
        assert_eq!(cat.tables()[1].foreign_keys[0].ref_table, "p");
    }

    #[test]
    fn reserved_names_survive_emission() {
        let cat = parse_ddl("CREATE TABLE \"table\" (\"primary\" INTEGER PRIMARY KEY, \"a\"\"b\" DATE);").unwrap();
        let emitted = emit_ddl(&cat);
        assert_eq!(parse_ddl(&emitted).unwrap(), cat);
    }
}
