//! Tolerant Java lexer and method-declaration extractor.
//!
//! The extractor never panics on malformed input. It works over a bracket
//! matching table built from the token stream, so an unbalanced region only
//! affects the declarations inside it; problems are reported as
//! [`Diagnostic`]s alongside whatever methods could still be recovered.

use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Char,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Range<usize>,
}

impl Token {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.span.clone()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub offset: usize,
    pub message: String,
}

/// Longest operators first so that greedy matching picks them.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=",
    "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<", ">>",
];

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Split Java source into tokens, dropping whitespace and comments.
pub fn lex(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let mut i = 0;

    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            i = src[i..].find('\n').map_or(bytes.len(), |n| i + n + 1);
            continue;
        }
        if src[i..].starts_with("/*") {
            match src[i + 2..].find("*/") {
                Some(n) => i = i + 2 + n + 2,
                None => {
                    diags.push(Diagnostic {
                        offset: i,
                        message: "unterminated block comment".into(),
                    });
                    i = bytes.len();
                }
            }
            continue;
        }
        let start = i;
        if src[i..].starts_with("\"\"\"") {
            let end = src[i + 3..].find("\"\"\"").map(|n| i + 3 + n + 3);
            i = end.unwrap_or_else(|| {
                diags.push(Diagnostic {
                    offset: start,
                    message: "unterminated text block".into(),
                });
                bytes.len()
            });
            tokens.push(Token {
                kind: TokenKind::Str,
                span: start..i,
            });
            continue;
        }
        if b == b'"' || b == b'\'' {
            i = scan_quoted(bytes, i, b);
            if i > bytes.len() || bytes.get(i - 1) != Some(&b) || i == start + 1 {
                diags.push(Diagnostic {
                    offset: start,
                    message: "unterminated literal".into(),
                });
                i = i.min(bytes.len());
            }
            let kind = if b == b'"' {
                TokenKind::Str
            } else {
                TokenKind::Char
            };
            tokens.push(Token {
                kind,
                span: start..i,
            });
            continue;
        }
        let c = src[i..].chars().next().unwrap_or('\0');
        if is_ident_start(c) {
            let end = src[i..]
                .char_indices()
                .find(|&(_, ch)| !is_ident_part(ch))
                .map_or(src.len(), |(n, _)| i + n);
            tokens.push(Token {
                kind: TokenKind::Ident,
                span: i..end,
            });
            i = end;
            continue;
        }
        if b.is_ascii_digit() || (b == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i += 1;
            while i < bytes.len() {
                let d = bytes[i];
                let exponent_sign = (d == b'+' || d == b'-')
                    && matches!(bytes[i - 1], b'e' | b'E' | b'p' | b'P')
                    && !src[start..].starts_with("0x");
                if d.is_ascii_alphanumeric() || d == b'_' || d == b'.' || exponent_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            tokens.push(Token {
                kind: TokenKind::Number,
                span: start..i,
            });
            continue;
        }
        let len = OPERATORS
            .iter()
            .find(|op| src[i..].starts_with(**op))
            .map_or(c.len_utf8(), |op| op.len());
        tokens.push(Token {
            kind: TokenKind::Punct,
            span: i..i + len,
        });
        i += len;
    }
    (tokens, diags)
}

/// Returns the index just past the closing quote, or `bytes.len() + 1` when
/// the literal runs into a newline or the end of input.
fn scan_quoted(bytes: &[u8], start: usize, quote: u8) -> usize {
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => return i,
            c if c == quote => return i + 1,
            _ => i += 1,
        }
    }
    bytes.len() + 1
}

/// One method (or constructor) declaration with a body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodDecl {
    /// Enclosing class chain plus method name, e.g. `Outer.Inner.run` or `Outer$1.run`.
    pub qualified_name: String,
    pub name: String,
    /// Parameter type list, e.g. `(int,java.util.List<String>)`.
    pub signature: String,
    pub param_count: usize,
    /// Byte span of the whole declaration, from the first modifier or
    /// annotation through the closing brace.
    pub span: Range<usize>,
    /// Simple name and arity of every invocation inside the body.
    pub invocations: Vec<(String, usize)>,
}

impl MethodDecl {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.span.clone()]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub methods: Vec<MethodDecl>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Extraction {
    pub fn is_clean(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

/// Extract every method declaration that has a body, in source order.
pub fn extract_methods(src: &str) -> Extraction {
    let (toks, mut diags) = lex(src);
    let close = match_brackets(src, &toks, &mut diags);
    let mut open = vec![None; toks.len()];
    for (i, c) in close.iter().enumerate() {
        if let Some(c) = c {
            open[*c] = Some(i);
        }
    }
    let mut parser = Parser {
        src,
        toks: &toks,
        close,
        open,
        methods: Vec::new(),
        diags,
        anon: HashMap::new(),
    };
    parser.members(0, toks.len(), &[]);
    let mut methods = parser.methods;
    methods.sort_by_key(|m| m.span.start);
    Extraction {
        methods,
        diagnostics: parser.diags,
    }
}

fn match_brackets(src: &str, toks: &[Token], diags: &mut Vec<Diagnostic>) -> Vec<Option<usize>> {
    let mut close = vec![None; toks.len()];
    let mut stack: Vec<(usize, &str)> = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        if t.kind != TokenKind::Punct {
            continue;
        }
        let text = t.text(src);
        match text {
            "(" | "[" | "{" => stack.push((i, text)),
            ")" | "]" | "}" => {
                let want = match text {
                    ")" => "(",
                    "]" => "[",
                    _ => "{",
                };
                // Pop until the matching opener; anything popped on the way is unbalanced.
                if let Some(pos) = stack.iter().rposition(|&(_, o)| o == want) {
                    for &(j, _) in &stack[pos + 1..] {
                        diags.push(Diagnostic {
                            offset: toks[j].span.start,
                            message: "unclosed bracket".into(),
                        });
                    }
                    let (open, _) = stack[pos];
                    stack.truncate(pos);
                    close[open] = Some(i);
                } else {
                    diags.push(Diagnostic {
                        offset: t.span.start,
                        message: format!("unmatched `{text}`"),
                    });
                }
            }
            _ => {}
        }
    }
    for (j, _) in stack {
        diags.push(Diagnostic {
            offset: toks[j].span.start,
            message: "unclosed bracket".into(),
        });
    }
    close
}

struct Parser<'a> {
    src: &'a str,
    toks: &'a [Token],
    close: Vec<Option<usize>>,
    open: Vec<Option<usize>>,
    methods: Vec<MethodDecl>,
    diags: Vec<Diagnostic>,
    anon: HashMap<String, usize>,
}

impl<'a> Parser<'a> {
    fn text(&self, i: usize) -> &'a str {
        self.toks.get(i).map_or("", |t| t.text(self.src))
    }

    fn is_ident(&self, i: usize) -> bool {
        self.toks.get(i).is_some_and(|t| t.kind == TokenKind::Ident)
    }

    fn is_punct(&self, i: usize, p: &str) -> bool {
        self.toks
            .get(i)
            .is_some_and(|t| t.kind == TokenKind::Punct && t.text(self.src) == p)
    }

    /// Index of the closer matching the opener at `i`, clamped to `end`.
    fn close_of(&mut self, i: usize, end: usize) -> usize {
        match self.close[i] {
            Some(c) if c < end => c,
            _ => end,
        }
    }

    /// Is token `i` a type-declaring keyword (`class Foo`, `record Foo(`...)?
    fn type_keyword_at(&self, i: usize) -> bool {
        if i > 0 && self.is_punct(i - 1, ".") {
            return false;
        }
        match self.text(i) {
            "class" | "interface" | "enum" => self.is_ident(i + 1),
            "record" => {
                self.is_ident(i + 1) && (self.is_punct(i + 2, "(") || self.is_punct(i + 2, "<"))
            }
            _ => false,
        }
    }

    /// Member declarations of a type body occupying tokens `[i, end)`.
    fn members(&mut self, mut i: usize, end: usize, chain: &[String]) {
        while i < end {
            if self.is_punct(i, ";") {
                i += 1;
                continue;
            }
            if self.is_punct(i, "}") {
                i += 1;
                continue;
            }
            let start = i;
            let mut j = i;
            while j < end {
                if self.is_punct(j, "(") || self.is_punct(j, "[") {
                    j = self.close_of(j, end) + 1;
                    continue;
                }
                if ["{", ";", "}", "="].iter().any(|p| self.is_punct(j, p)) {
                    break;
                }
                j += 1;
            }
            if j >= end {
                return;
            }
            match self.text(j) {
                ";" => i = j + 1,
                "}" => i = j + 1,
                "=" => i = self.code(j + 1, end, chain, true),
                _ => {
                    let body_end = self.close_of(j, end);
                    if let Some(k) = (start..j).find(|&k| self.type_keyword_at(k)) {
                        self.type_body(k, j, body_end, chain);
                    } else if let Some(decl) = self.method_header(start, j, body_end, chain) {
                        let invocations = self.invocations(j + 1, body_end);
                        self.methods.push(MethodDecl {
                            invocations,
                            ..decl
                        });
                        self.code(j + 1, body_end, chain, false);
                    } else {
                        // initializer block or compact record constructor
                        self.code(j + 1, body_end, chain, false);
                    }
                    i = body_end + 1;
                }
            }
        }
    }

    /// `kw` is the type keyword, `open` its body's `{`, `close` the matching `}`.
    fn type_body(&mut self, kw: usize, open: usize, close: usize, chain: &[String]) {
        let mut inner = chain.to_vec();
        inner.push(self.text(kw + 1).to_string());
        if self.text(kw) == "enum" {
            self.enum_body(open + 1, close, &inner);
        } else {
            self.members(open + 1, close, &inner);
        }
    }

    fn enum_body(&mut self, mut i: usize, end: usize, chain: &[String]) {
        let mut constant: Option<String> = None;
        while i < end {
            match self.text(i) {
                ";" if self.is_punct(i, ";") => {
                    self.members(i + 1, end, chain);
                    return;
                }
                "(" | "[" if self.toks[i].kind == TokenKind::Punct => i = self.close_of(i, end) + 1,
                "{" if self.toks[i].kind == TokenKind::Punct => {
                    let c = self.close_of(i, end);
                    let mut inner = chain.to_vec();
                    inner.push(constant.clone().unwrap_or_else(|| "$const".into()));
                    self.members(i + 1, c, &inner);
                    i = c + 1;
                }
                "," if self.is_punct(i, ",") => {
                    constant = None;
                    i += 1;
                }
                _ => {
                    if self.is_ident(i) && !(i > 0 && self.is_punct(i - 1, "@")) {
                        constant = Some(self.text(i).to_string());
                    }
                    i += 1;
                }
            }
        }
    }

    /// Recognise `... name(params) [throws X, Y] {` between `start` and the `{` at `open`.
    fn method_header(
        &mut self,
        start: usize,
        open: usize,
        close: usize,
        chain: &[String],
    ) -> Option<MethodDecl> {
        // find the top-level paren groups and an optional throws clause
        let mut k = start;
        let mut last_group: Option<(usize, usize)> = None;
        let mut throws_at = None;
        while k < open {
            if self.is_punct(k, "(") {
                let c = self.close_of(k, open);
                last_group = Some((k, c));
                k = c + 1;
                continue;
            }
            if self.text(k) == "throws" && self.is_ident(k) {
                throws_at = Some(k);
                break;
            }
            k += 1;
        }
        let stop = throws_at.unwrap_or(open);
        let (p_open, p_close) = last_group?;
        if p_close + 1 != stop || p_open == start {
            return None;
        }
        let name_idx = p_open - 1;
        if !self.is_ident(name_idx) || is_keyword(self.text(name_idx)) {
            return None;
        }
        if name_idx > start && self.is_punct(name_idx - 1, "@") {
            return None;
        }
        if (start..name_idx).any(|i| self.text(i) == "new" && self.is_ident(i)) {
            return None;
        }
        let name = self.text(name_idx).to_string();
        let params = self.parameter_types(p_open + 1, p_close);
        let qualified_name = if chain.is_empty() {
            name.clone()
        } else {
            format!("{}.{}", chain.join("."), name)
        };
        let span_end = if close < self.toks.len() {
            self.toks[close].span.end
        } else {
            self.src.len()
        };
        Some(MethodDecl {
            qualified_name,
            name,
            signature: format!("({})", params.join(",")),
            param_count: params.len(),
            span: self.toks[start].span.start..span_end,
            invocations: Vec::new(),
        })
    }

    fn parameter_types(&self, start: usize, end: usize) -> Vec<String> {
        let mut params = Vec::new();
        let mut current = Vec::new();
        let mut angle = 0i32;
        let mut depth = 0i32;
        for i in start..end {
            let t = self.text(i);
            let punct = self.toks[i].kind == TokenKind::Punct;
            if punct {
                match t {
                    "<" => angle += 1,
                    ">" => angle -= 1,
                    ">>" => angle -= 2,
                    ">>>" => angle -= 3,
                    "(" | "[" => depth += 1,
                    ")" | "]" => depth -= 1,
                    "," if angle <= 0 && depth <= 0 => {
                        params.push(std::mem::take(&mut current));
                        continue;
                    }
                    _ => {}
                }
            }
            current.push(i);
        }
        if !current.is_empty() {
            params.push(current);
        }
        params
            .into_iter()
            .filter_map(|p| self.parameter_type(&p))
            .collect()
    }

    fn parameter_type(&self, toks: &[usize]) -> Option<String> {
        // drop annotations and modifiers
        let mut i = 0;
        while i < toks.len() {
            let t = self.text(toks[i]);
            if t == "@" && self.toks[toks[i]].kind == TokenKind::Punct {
                i += 1;
                while i < toks.len()
                    && (self.is_ident(toks[i]) || self.text(toks[i]) == ".")
                    && !(i + 1 < toks.len() && self.is_ident(toks[i]) && self.is_ident(toks[i + 1]))
                {
                    i += 1;
                }
                // the loop above stops before the last identifier of the annotation name
                if i < toks.len() && self.is_ident(toks[i]) {
                    i += 1;
                }
                if i < toks.len() && self.text(toks[i]) == "(" {
                    let mut depth = 0;
                    while i < toks.len() {
                        match self.text(toks[i]) {
                            "(" => depth += 1,
                            ")" => {
                                depth -= 1;
                                if depth == 0 {
                                    i += 1;
                                    break;
                                }
                            }
                            _ => {}
                        }
                        i += 1;
                    }
                }
            } else if t == "final" {
                i += 1;
            } else {
                break;
            }
        }
        let rest = &toks[i..];
        if rest.is_empty() {
            return None;
        }
        // the declared name is the last identifier; trailing `[]` after it belong to the type
        let name_pos = rest.iter().rposition(|&k| self.is_ident(k))?;
        let mut ty = String::new();
        let mut prev_word = false;
        for &k in &rest[..name_pos] {
            let word = self.is_ident(k);
            if word && prev_word {
                ty.push(' ');
            }
            ty.push_str(self.text(k));
            prev_word = word;
        }
        for &k in &rest[name_pos + 1..] {
            ty.push_str(self.text(k));
        }
        if ty.is_empty() {
            // lambda-style or malformed; fall back to the lone token
            ty.push_str(self.text(rest[name_pos]));
        }
        Some(ty)
    }

    /// Scan statements in `[i, end)` for anonymous and local class bodies.
    /// With `until_semicolon`, stops after the first top-level `;` and
    /// returns the index past it.
    fn code(&mut self, mut i: usize, end: usize, chain: &[String], until_semicolon: bool) -> usize {
        let mut depth = 0i32;
        while i < end {
            if self.toks[i].kind == TokenKind::Punct {
                match self.text(i) {
                    ";" if until_semicolon && depth == 0 => return i + 1,
                    "(" | "[" => depth += 1,
                    ")" | "]" | "}" => depth -= 1,
                    "{" => {
                        if self.is_anonymous_body(i) {
                            let c = self.close_of(i, end);
                            let segment = self.anonymous_name(chain);
                            self.members(i + 1, c, &segment);
                            i = c + 1;
                            continue;
                        }
                        depth += 1;
                    }
                    _ => {}
                }
            } else if self.type_keyword_at(i) {
                let mut k = i + 2;
                while k < end && !self.is_punct(k, "{") {
                    if self.is_punct(k, "(") {
                        k = self.close_of(k, end);
                    }
                    k += 1;
                }
                if k < end {
                    let c = self.close_of(k, end);
                    self.type_body(i, k, c, chain);
                    i = c + 1;
                    continue;
                }
            }
            i += 1;
        }
        end
    }

    fn is_anonymous_body(&self, brace: usize) -> bool {
        if brace == 0 || !self.is_punct(brace - 1, ")") {
            return false;
        }
        let Some(open) = self.open[brace - 1] else {
            return false;
        };
        let mut k = open;
        while k > 0 {
            k -= 1;
            let t = self.text(k);
            if self.is_ident(k) && t == "new" {
                return true;
            }
            let type_part =
                self.is_ident(k) || matches!(t, "." | "<" | ">" | ">>" | ">>>" | "," | "?" | "@");
            if !type_part {
                return false;
            }
        }
        false
    }

    fn anonymous_name(&mut self, chain: &[String]) -> Vec<String> {
        let key = chain.join(".");
        let n = self.anon.entry(key).or_insert(0);
        *n += 1;
        let mut out = chain.to_vec();
        match out.last_mut() {
            Some(last) => last.push_str(&format!("${n}")),
            None => out.push(format!("${n}")),
        }
        out
    }

    fn invocations(&mut self, start: usize, end: usize) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        for i in start..end.min(self.toks.len()) {
            if !self.is_ident(i) || !self.is_punct(i + 1, "(") {
                continue;
            }
            let name = self.text(i);
            if is_keyword(name) || (i > 0 && self.text(i - 1) == "new" && self.is_ident(i - 1)) {
                continue;
            }
            if i > 0 && self.is_punct(i - 1, "@") {
                continue;
            }
            let close = self.close_of(i + 1, end);
            // a declaration inside an anonymous or local class, not a call
            if self.is_punct(close + 1, "{") || self.text(close + 1) == "throws" {
                continue;
            }
            out.push((name.to_string(), self.arity(i + 1, close)));
        }
        out
    }

    fn arity(&self, open: usize, close: usize) -> usize {
        if close == open + 1 {
            return 0;
        }
        let mut n = 1;
        let mut depth = 0;
        for k in open + 1..close {
            if self.toks[k].kind != TokenKind::Punct {
                continue;
            }
            match self.text(k) {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => depth -= 1,
                "," if depth == 0 => n += 1,
                _ => {}
            }
        }
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(src: &str) -> Vec<(String, String)> {
        extract_methods(src)
            .methods
            .into_iter()
            .map(|m| (m.qualified_name, m.signature))
            .collect()
    }

    #[test]
    fn lexes_operators_and_drops_comments() {
        let src = "a >>>= b; // tail\n/* block */ c->d";
        let (toks, diags) = lex(src);
        let texts: Vec<_> = toks.iter().map(|t| t.text(src)).collect();
        assert_eq!(texts, ["a", ">>>=", "b", ";", "c", "->", "d"]);
        assert!(diags.is_empty());
    }

    #[test]
    fn lexes_literals() {
        let src = r#"x = "a \"q\" b" + 'c' + 1.5e-3f + """
text"""; "#;
        let (toks, _) = lex(src);
        let kinds: Vec<_> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            [
                TokenKind::Ident,
                TokenKind::Punct,
                TokenKind::Str,
                TokenKind::Punct,
                TokenKind::Char,
                TokenKind::Punct,
                TokenKind::Number,
                TokenKind::Punct,
                TokenKind::Str,
                TokenKind::Punct
            ]
        );
        assert_eq!(toks[6].text(src), "1.5e-3f");
    }

    #[test]
    fn two_methods_with_spans() {
        let src = "class Counter {\n  int total;\n  int sum() { return total; }\n  void reset() { total = 0; }\n}\n";
        let ex = extract_methods(src);
        assert!(ex.is_clean());
        assert_eq!(ex.methods.len(), 2);
        assert_eq!(ex.methods[0].qualified_name, "Counter.sum");
        assert_eq!(ex.methods[0].text(src), "int sum() { return total; }");
        assert_eq!(ex.methods[1].qualified_name, "Counter.reset");
        assert_eq!(ex.methods[1].text(src), "void reset() { total = 0; }");
    }

    #[test]
    fn empty_class_body() {
        assert!(extract_methods("public class Empty {}").methods.is_empty());
        assert!(extract_methods("").methods.is_empty());
    }

    #[test]
    fn overloads_distinguished_by_signature() {
        let src = "class A { void f(int x) {} void f(long x) {} }";
        assert_eq!(
            names(src),
            [
                ("A.f".to_string(), "(int)".to_string()),
                ("A.f".to_string(), "(long)".to_string())
            ]
        );
    }

    #[test]
    fn parameter_types_are_normalised() {
        let src = "class A { public <T> void g(final @Nonnull Map<String, List<T>> m, int[] xs, String... rest, char c[]) throws IOException, X { } }";
        assert_eq!(
            names(src),
            [(
                "A.g".to_string(),
                "(Map<String,List<T>>,int[],String...,char[])".to_string()
            )]
        );
    }

    #[test]
    fn nested_and_anonymous_classes() {
        let src = r#"
package p;
import java.util.*;
@SuppressWarnings("unchecked")
public class Outer {
    static { init(); }
    private final Runnable r = new Runnable() { public void run() { tick(); } };
    class Inner { int depth() { return 1; } }
    void start() {
        Thread t = new Thread(new Runnable() {
            @Override public void run() { go(1, 2); }
        });
        class Local { void helper() {} }
    }
    Outer() { this(1); }
}
"#;
        let got: Vec<String> = names(src).into_iter().map(|(n, _)| n).collect();
        assert_eq!(
            got,
            [
                "Outer$1.run",
                "Outer.Inner.depth",
                "Outer.start",
                "Outer$2.run",
                "Outer.Local.helper",
                "Outer.Outer"
            ]
        );
    }

    #[test]
    fn interface_enum_and_annotation_members() {
        let src = r#"
interface Shape { double area(); default String label() { return "s"; } }
enum Op {
    ADD { int apply(int a, int b) { return a + b; } },
    SUB(2) { int apply(int a, int b) { return a - b; } };
    Op() {}
    Op(int k) {}
    abstract int apply(int a, int b);
    static Op parse(String s) { return valueOf(s); }
}
@interface Marker { String value() default ""; }
record Point(int x, int y) { Point { check(x); } int sum() { return x + y; } }
"#;
        let got: Vec<String> = names(src)
            .into_iter()
            .map(|(n, s)| format!("{n}{s}"))
            .collect();
        assert_eq!(
            got,
            [
                "Shape.label()",
                "Op.ADD.apply(int,int)",
                "Op.SUB.apply(int,int)",
                "Op.Op()",
                "Op.Op(int)",
                "Op.parse(String)",
                "Point.sum()"
            ]
        );
    }

    #[test]
    fn field_initialisers_with_braces_and_lambdas() {
        let src =
            "class A { int[] xs = {1, 2}; Runnable r = () -> { go(); }; int m() { return 0; } }";
        assert_eq!(names(src), [("A.m".to_string(), "()".to_string())]);
    }

    #[test]
    fn invocations_with_arity() {
        let src = "class A { void m() { foo(); bar(1, g(2, 3)); this.baz(x -> x, 1); new Foo(1); if (x) {} } }";
        let ex = extract_methods(src);
        let calls = &ex.methods[0].invocations;
        assert_eq!(
            calls,
            &[
                ("foo".to_string(), 0),
                ("bar".to_string(), 2),
                ("g".to_string(), 2),
                ("baz".to_string(), 2)
            ]
        );
    }

    #[test]
    fn malformed_input_reports_diagnostics_without_panicking() {
        let src = "class A { void ok() { } void broken( { \"unterminated\n } /* never closed";
        let ex = extract_methods(src);
        assert!(!ex.is_clean());
        assert!(ex.methods.iter().any(|m| m.qualified_name == "A.ok"));
    }

    #[test]
    fn string_contents_do_not_confuse_parsing() {
        let src = "class A { String s() { return \"} class X { void y() {\"; } }";
        assert_eq!(names(src), [("A.s".to_string(), "()".to_string())]);
    }

    proptest::proptest! {
        #[test]
        fn never_panics_on_arbitrary_input(s in "\\PC{0,200}") {
            let _ = extract_methods(&s);
        }

        #[test]
        fn never_panics_on_javaish_input(s in "[{}();,=a-c \"'/*<>@.]{0,120}") {
            let ex = extract_methods(&s);
            for m in ex.methods {
                proptest::prop_assert!(m.span.end <= s.len());
            }
        }
    }
}
