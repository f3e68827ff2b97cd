//! Construct detection over the token stream.
//!
//! Each rule here is a documented contract, not an attempt at full C
//! semantics: a shallow syntactic layer (brace/paren context, neighbor
//! tokens, a top-level item scan) disambiguates the cases that pure pattern
//! matching gets wrong. Known undercounts are deliberate and noted inline.

use crate::features::{FeatureId, FeatureVector};

use super::lex::{Token, TokenKind};

/// One detected construct occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchSite {
    pub feature: FeatureId,
    pub line: u32,
    pub col: u32,
}

pub struct Detection {
    pub vector: FeatureVector,
    pub sites: Vec<MatchSite>,
}

/// Operator-shaped punctuators: "previous token is an operator" checks.
const OPERATORS: &[&str] = &[
    "+", "-", "*", "/", "%", "=", "==", "!=", "<", ">", "<=", ">=", "&&", "||", "!", "&", "|",
    "^", "~", "<<", ">>", "++", "--", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=",
    "^=", "?", ":",
];

const COMPOUND_ASSIGN: &[&str] = &["+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=", "^="];

const TYPE_KEYWORDS: &[&str] = &[
    "int", "char", "long", "short", "signed", "unsigned", "void", "float", "double", "_Bool",
    "__signed__",
];

const QUALIFIER_KEYWORDS: &[&str] = &[
    "const", "volatile", "restrict", "__const", "__volatile", "__volatile__", "__restrict",
    "__restrict__",
];

/// Fixed-width typedef names treated as type keywords for declarator
/// detection; custom typedefs in parameter lists are deliberately not
/// guessed at.
const KNOWN_TYPEDEFS: &[&str] = &[
    "int8_t", "uint8_t", "int16_t", "uint16_t", "int32_t", "uint32_t", "int64_t", "uint64_t",
    "size_t", "ssize_t", "ptrdiff_t", "intptr_t", "uintptr_t", "wchar_t",
];

fn is_operator(lexeme: &str) -> bool {
    OPERATORS.contains(&lexeme)
}

fn is_type_keyword(lexeme: &str) -> bool {
    TYPE_KEYWORDS.contains(&lexeme) || KNOWN_TYPEDEFS.contains(&lexeme)
}

fn is_qualifier(lexeme: &str) -> bool {
    QUALIFIER_KEYWORDS.contains(&lexeme)
}

fn is_volatile_kw(lexeme: &str) -> bool {
    matches!(lexeme, "volatile" | "__volatile" | "__volatile__")
}

fn is_const_kw(lexeme: &str) -> bool {
    matches!(lexeme, "const" | "__const")
}

/// Token kinds that can end an operand: a `/`, `%`, or `*` after one of
/// these is a binary operator.
fn ends_operand(tok: &Token) -> bool {
    matches!(
        tok.kind,
        TokenKind::Identifier | TokenKind::Number | TokenKind::Str | TokenKind::CharLit
    ) || matches!(tok.lexeme.as_str(), ")" | "]")
}

/// Contexts where the next `+`, `&`, or `(` starts a subexpression.
fn starts_expression(prev: Option<&Token>) -> bool {
    match prev {
        None => true,
        Some(t) => {
            is_operator(&t.lexeme)
                || matches!(t.lexeme.as_str(), "(" | "," | ";" | "{" | "}" | "[")
                || (t.kind == TokenKind::Keyword && t.lexeme == "return")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Group {
    /// `(` opened in expression position: commas inside are comma operators.
    ExprParen,
    /// `(` opened by a call, declaration, or statement head.
    OtherParen,
    Bracket,
    StructBrace,
    OtherBrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TagState {
    None,
    /// Just saw `struct`/`union`; a tag identifier may follow.
    WantTagOrBrace,
    /// Saw `struct`/`union` and its tag; only `{` keeps this alive.
    WantBrace,
}

pub fn detect(tokens: &[Token]) -> Detection {
    let mut counts = FeatureVector::zero();
    let mut sites: Vec<MatchSite> = Vec::new();

    let feature = |name: &str| FeatureId::from_name(name).expect("canonical name");

    let f_argc = feature("argc");
    let f_arrays = feature("arrays");
    let f_bitfields = feature("bitfields");
    let f_comma = feature("comma-operators");
    let f_compound = feature("compound-assignment");
    let f_consts = feature("consts");
    let f_divs = feature("divs");
    let f_pre_incr = feature("pre-incr-operator");
    let f_pre_decr = feature("pre-decr-operator");
    let f_post_incr = feature("post-incr-operator");
    let f_post_decr = feature("post-decr-operator");
    let f_unary_plus = feature("unary-plus-operator");
    let f_jumps = feature("jumps");
    let f_longlong = feature("longlong");
    let f_int8 = feature("int8");
    let f_uint8 = feature("uint8");
    let f_float = feature("float");
    let f_inline = feature("inline-function");
    let f_muls = feature("muls");
    let f_packed = feature("packed-struct");
    let f_pointers = feature("pointers");
    let f_structs = feature("structs");
    let f_unions = feature("unions");
    let f_volatiles = feature("volatiles");
    let f_volatile_ptr = feature("volatile-pointers");
    let f_const_ptr = feature("const-pointers");
    let f_globals = feature("global-variables");
    let f_builtins = feature("builtins");

    let mut groups: Vec<Group> = Vec::new();
    let mut tag_state = TagState::None;
    // indices of `*` tokens classified as declarator stars
    let mut declarator_stars: Vec<usize> = Vec::new();

    let mut i = 0;
    while i < tokens.len() {
        let tok = &tokens[i];
        let prev = if i > 0 { Some(&tokens[i - 1]) } else { None };
        let next = tokens.get(i + 1);

        let hit = |f: FeatureId, sites: &mut Vec<MatchSite>, counts: &mut FeatureVector| {
            counts.add(f, 1);
            sites.push(MatchSite {
                feature: f,
                line: tok.line,
                col: tok.col,
            });
        };

        // attribute groups are scanned for `packed` and otherwise skipped so
        // their argument lists cannot leak into the expression rules
        if tok.lexeme == "__attribute__" {
            let mut j = i + 1;
            if tokens.get(j).map(|t| t.lexeme.as_str()) == Some("(") {
                let mut depth = 0usize;
                while j < tokens.len() {
                    match tokens[j].lexeme.as_str() {
                        "(" => depth += 1,
                        ")" => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        "packed" | "__packed__" => {
                            counts.add(f_packed, 1);
                            sites.push(MatchSite {
                                feature: f_packed,
                                line: tokens[j].line,
                                col: tokens[j].col,
                            });
                        }
                        _ => {}
                    }
                    j += 1;
                }
                i = (j + 1).min(tokens.len());
                continue;
            }
            i += 1;
            continue;
        }

        match tok.kind {
            TokenKind::Keyword => {
                match tok.lexeme.as_str() {
                    "goto" => hit(f_jumps, &mut sites, &mut counts),
                    "struct" => {
                        hit(f_structs, &mut sites, &mut counts);
                        tag_state = TagState::WantTagOrBrace;
                    }
                    "union" => {
                        hit(f_unions, &mut sites, &mut counts);
                        tag_state = TagState::WantTagOrBrace;
                    }
                    "float" | "double" => hit(f_float, &mut sites, &mut counts),
                    "inline" | "__inline" | "__inline__" => {
                        hit(f_inline, &mut sites, &mut counts)
                    }
                    "long" => {
                        if prev.map(|p| p.lexeme == "long").unwrap_or(false) {
                            hit(f_longlong, &mut sites, &mut counts);
                        }
                    }
                    kw if is_const_kw(kw) => hit(f_consts, &mut sites, &mut counts),
                    kw if is_volatile_kw(kw) => hit(f_volatiles, &mut sites, &mut counts),
                    _ => {}
                }
                if tok.lexeme != "struct" && tok.lexeme != "union" {
                    tag_state = TagState::None;
                }
            }
            TokenKind::Identifier => {
                match tok.lexeme.as_str() {
                    "int8_t" => hit(f_int8, &mut sites, &mut counts),
                    "uint8_t" => hit(f_uint8, &mut sites, &mut counts),
                    "argc" => hit(f_argc, &mut sites, &mut counts),
                    name if name.starts_with("__builtin_") => {
                        hit(f_builtins, &mut sites, &mut counts)
                    }
                    _ => {}
                }
                tag_state = match tag_state {
                    TagState::WantTagOrBrace => TagState::WantBrace,
                    _ => TagState::None,
                };
            }
            TokenKind::Number | TokenKind::Str | TokenKind::CharLit => {
                tag_state = TagState::None;
            }
            TokenKind::Punct => {
                match tok.lexeme.as_str() {
                    "[" => {
                        if prev
                            .map(|p| p.kind == TokenKind::Identifier || p.lexeme == "]")
                            .unwrap_or(false)
                        {
                            hit(f_arrays, &mut sites, &mut counts);
                        }
                        groups.push(Group::Bracket);
                    }
                    "]" => {
                        groups.pop();
                    }
                    "(" => {
                        let expr = match prev {
                            None => false,
                            Some(p) => {
                                is_operator(&p.lexeme)
                                    || matches!(p.lexeme.as_str(), "(" | ";")
                                    || (p.kind == TokenKind::Keyword && p.lexeme == "return")
                            }
                        };
                        groups.push(if expr {
                            Group::ExprParen
                        } else {
                            Group::OtherParen
                        });
                    }
                    ")" => {
                        groups.pop();
                    }
                    "{" => {
                        let g = if tag_state != TagState::None {
                            Group::StructBrace
                        } else {
                            Group::OtherBrace
                        };
                        groups.push(g);
                        tag_state = TagState::None;
                    }
                    "}" => {
                        groups.pop();
                    }
                    "," => {
                        if groups.last() == Some(&Group::ExprParen) {
                            hit(f_comma, &mut sites, &mut counts);
                        }
                    }
                    op if COMPOUND_ASSIGN.contains(&op) => {
                        hit(f_compound, &mut sites, &mut counts)
                    }
                    "/" | "%" => {
                        if prev.map(ends_operand).unwrap_or(false) {
                            hit(f_divs, &mut sites, &mut counts);
                        }
                    }
                    "*" => {
                        let declarator = match prev {
                            Some(p) => {
                                (p.kind == TokenKind::Keyword
                                    && (is_type_keyword(&p.lexeme) || is_qualifier(&p.lexeme)))
                                    || (p.kind == TokenKind::Identifier
                                        && is_type_keyword(&p.lexeme))
                                    || (p.lexeme == "*"
                                        && declarator_stars.last() == Some(&(i - 1)))
                                    // tag of a struct/union/enum type
                                    || (p.kind == TokenKind::Identifier
                                        && i >= 2
                                        && matches!(
                                            tokens[i - 2].lexeme.as_str(),
                                            "struct" | "union" | "enum"
                                        ))
                                    // identifier opening a statement reads as a typedef name
                                    || (p.kind == TokenKind::Identifier
                                        && (i < 2
                                            || matches!(
                                                tokens[i - 2].lexeme.as_str(),
                                                ";" | "{" | "}"
                                            )))
                            }
                            None => false,
                        };
                        if declarator {
                            declarator_stars.push(i);
                            hit(f_pointers, &mut sites, &mut counts);
                        } else if prev.map(ends_operand).unwrap_or(false) {
                            hit(f_muls, &mut sites, &mut counts);
                        }
                    }
                    "&" => {
                        if starts_expression(prev) {
                            hit(f_pointers, &mut sites, &mut counts);
                        }
                    }
                    "->" => hit(f_pointers, &mut sites, &mut counts),
                    "++" | "--" => {
                        let post = prev
                            .map(|p| {
                                p.kind == TokenKind::Identifier
                                    || matches!(p.lexeme.as_str(), ")" | "]")
                            })
                            .unwrap_or(false);
                        let f = match (tok.lexeme.as_str(), post) {
                            ("++", true) => f_post_incr,
                            ("++", false) => f_pre_incr,
                            ("--", true) => f_post_decr,
                            _ => f_pre_decr,
                        };
                        hit(f, &mut sites, &mut counts);
                    }
                    "+" => {
                        if starts_expression(prev) {
                            hit(f_unary_plus, &mut sites, &mut counts);
                        }
                    }
                    ":" => {
                        let in_struct_body = groups.last() == Some(&Group::StructBrace);
                        if in_struct_body
                            && next.map(|n| n.kind == TokenKind::Number).unwrap_or(false)
                        {
                            hit(f_bitfields, &mut sites, &mut counts);
                        }
                    }
                    _ => {}
                }
                if tok.lexeme != "{" {
                    tag_state = TagState::None;
                }
            }
        }
        i += 1;
    }

    // volatile/const within two tokens of a declarator star, either side
    for &s in &declarator_stars {
        let lo = s.saturating_sub(2);
        let hi = (s + 2).min(tokens.len() - 1);
        let window = (lo..=hi).filter(|&j| j != s);
        let mut saw_volatile = false;
        let mut saw_const = false;
        for j in window {
            if tokens[j].kind == TokenKind::Keyword {
                saw_volatile |= is_volatile_kw(&tokens[j].lexeme);
                saw_const |= is_const_kw(&tokens[j].lexeme);
            }
        }
        if saw_volatile {
            counts.add(f_volatile_ptr, 1);
            sites.push(MatchSite {
                feature: f_volatile_ptr,
                line: tokens[s].line,
                col: tokens[s].col,
            });
        }
        if saw_const {
            counts.add(f_const_ptr, 1);
            sites.push(MatchSite {
                feature: f_const_ptr,
                line: tokens[s].line,
                col: tokens[s].col,
            });
        }
    }

    scan_top_level(tokens, &mut counts, &mut sites, f_globals, f_argc);

    Detection {
        vector: counts,
        sites,
    }
}

/// Top-level item scan: global variable declarations and `main` signatures.
///
/// An item is a run of tokens at brace depth zero, ended by `;` or by a
/// function body. Items that are function definitions or prototypes, typedefs,
/// or bare type declarations are not globals; anything else that declares an
/// identifier is.
fn scan_top_level(
    tokens: &[Token],
    counts: &mut FeatureVector,
    sites: &mut Vec<MatchSite>,
    f_globals: FeatureId,
    f_argc: FeatureId,
) {
    let mut i = 0;
    while i < tokens.len() {
        // collect one top-level item starting at i
        let start = i;
        let mut item: Vec<usize> = Vec::new();
        let mut is_fn_def = false;
        let mut ended = false;
        while i < tokens.len() {
            let lex = tokens[i].lexeme.as_str();
            // attribute groups never contribute declarators
            if lex == "__attribute__" {
                i += 1;
                if tokens.get(i).map(|t| t.lexeme.as_str()) == Some("(") {
                    let mut depth = 0usize;
                    while i < tokens.len() {
                        match tokens[i].lexeme.as_str() {
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
                continue;
            }
            match lex {
                ";" => {
                    i += 1;
                    ended = true;
                    break;
                }
                "(" | "[" => {
                    // consume balanced group, keeping tokens in the item
                    let open = lex;
                    let close = if open == "(" { ")" } else { "]" };
                    let mut depth = 0usize;
                    while i < tokens.len() {
                        if tokens[i].lexeme == open {
                            depth += 1;
                        } else if tokens[i].lexeme == close {
                            depth -= 1;
                            if depth == 0 {
                                item.push(i);
                                i += 1;
                                break;
                            }
                        }
                        item.push(i);
                        i += 1;
                    }
                    continue;
                }
                "{" => {
                    let has_eq = item.iter().any(|&j| tokens[j].lexeme == "=");
                    let has_candidate_fn = candidate_function_ident(tokens, &item).is_some();
                    // consume the balanced brace body without recording it
                    let mut depth = 0usize;
                    while i < tokens.len() {
                        if tokens[i].lexeme == "{" {
                            depth += 1;
                        } else if tokens[i].lexeme == "}" {
                            depth -= 1;
                            if depth == 0 {
                                i += 1;
                                break;
                            }
                        }
                        i += 1;
                    }
                    if !has_eq && has_candidate_fn {
                        is_fn_def = true;
                        ended = true;
                        break;
                    }
                    // initializer or tag body: the item continues to `;`
                    continue;
                }
                _ => {
                    item.push(i);
                    i += 1;
                }
            }
        }
        if item.is_empty() && !is_fn_def {
            if !ended && i >= tokens.len() {
                break;
            }
            continue;
        }

        let candidate = candidate_function_ident(tokens, &item);
        if let Some(ci) = candidate {
            if tokens[ci].lexeme == "main" && main_has_parameters(tokens, ci) {
                counts.add(f_argc, 1);
                sites.push(MatchSite {
                    feature: f_argc,
                    line: tokens[ci].line,
                    col: tokens[ci].col,
                });
            }
        }

        let has_eq = item.iter().any(|&j| tokens[j].lexeme == "=");
        let is_typedef = item.iter().any(|&j| tokens[j].lexeme == "typedef");
        let is_proto_or_def = is_fn_def || (candidate.is_some() && !has_eq);
        if is_typedef || is_proto_or_def {
            continue;
        }
        if is_type_only(tokens, &item) {
            continue;
        }
        let declares_ident = item
            .iter()
            .any(|&j| tokens[j].kind == TokenKind::Identifier);
        if declares_ident && ended {
            counts.add(f_globals, 1);
            sites.push(MatchSite {
                feature: f_globals,
                line: tokens[start].line,
                col: tokens[start].col,
            });
        }
    }
}

/// An identifier directly followed by `(` and not preceded by `*`: the shape
/// of a function declarator. `int (*fp)(void)` has no such identifier, which
/// correctly leaves it a global.
fn candidate_function_ident(tokens: &[Token], item: &[usize]) -> Option<usize> {
    for (pos, &j) in item.iter().enumerate() {
        if tokens[j].kind != TokenKind::Identifier {
            continue;
        }
        let followed_by_paren = item
            .get(pos + 1)
            .map(|&n| tokens[n].lexeme == "(")
            .unwrap_or(false);
        let preceded_by_star = pos
            .checked_sub(1)
            .and_then(|p| item.get(p))
            .map(|&p| tokens[p].lexeme == "*")
            .unwrap_or(false);
        if followed_by_paren && !preceded_by_star {
            return Some(j);
        }
    }
    None
}

fn main_has_parameters(tokens: &[Token], main_idx: usize) -> bool {
    let mut j = main_idx + 1;
    if tokens.get(j).map(|t| t.lexeme.as_str()) != Some("(") {
        return false;
    }
    j += 1;
    let mut params: Vec<&str> = Vec::new();
    let mut depth = 1usize;
    while j < tokens.len() && depth > 0 {
        match tokens[j].lexeme.as_str() {
            "(" => depth += 1,
            ")" => {
                depth -= 1;
                if depth == 0 {
                    break;
                }
            }
            other => params.push(other),
        }
        j += 1;
    }
    !(params.is_empty() || params == ["void"])
}

/// `struct S;`, `union U { ... };` and friends declare a type but no object.
fn is_type_only(tokens: &[Token], item: &[usize]) -> bool {
    let mut idents_outside_tag = 0usize;
    let mut saw_tag_keyword = false;
    let mut tag_taken = false;
    for &j in item {
        let t = &tokens[j];
        match t.kind {
            TokenKind::Keyword => {
                if matches!(t.lexeme.as_str(), "struct" | "union" | "enum") {
                    saw_tag_keyword = true;
                    tag_taken = false;
                }
            }
            TokenKind::Identifier => {
                if saw_tag_keyword && !tag_taken {
                    tag_taken = true;
                } else {
                    idents_outside_tag += 1;
                }
            }
            _ => {}
        }
    }
    saw_tag_keyword && idents_outside_tag == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::lex::tokenize;

    fn counts_for(src: &str) -> FeatureVector {
        detect(&tokenize(src).unwrap()).vector
    }

    fn count(src: &str, name: &str) -> u32 {
        counts_for(src).count(FeatureId::from_name(name).unwrap())
    }

    #[test]
    fn keyword_features() {
        let src = "void f(void) { goto out; out: ; }";
        assert_eq!(count(src, "jumps"), 1);
        assert_eq!(count("struct S { int x; };", "structs"), 1);
        assert_eq!(count("union U { int x; };", "unions"), 1);
        assert_eq!(count("volatile int v;", "volatiles"), 1);
        assert_eq!(count("float x; double y;", "float"), 2);
        assert_eq!(count("static inline int f(void) { return 0; }", "inline-function"), 1);
        assert_eq!(count("long long x;", "longlong"), 1);
        assert_eq!(count("long x;", "longlong"), 0);
    }

    #[test]
    fn fixed_width_idents() {
        assert_eq!(count("int8_t a;", "int8"), 1);
        assert_eq!(count("uint8_t b;", "uint8"), 1);
        assert_eq!(count("int a8;", "int8"), 0);
    }

    #[test]
    fn builtins_by_prefix() {
        assert_eq!(count("int x = __builtin_abs(1);", "builtins"), 1);
        assert_eq!(count("int __builtins;", "builtins"), 0);
    }

    #[test]
    fn argc_from_main_params_and_ident() {
        let src = "int main(int argc, char **argv) { return argc; }";
        // one hit for the parameterized main, two for the identifier uses
        assert_eq!(count(src, "argc"), 3);
        assert_eq!(count("int main(void) { return 0; }", "argc"), 0);
        assert_eq!(count("int main() { return 0; }", "argc"), 0);
    }

    #[test]
    fn arrays_after_identifier_or_bracket() {
        assert_eq!(count("void f(void) { int a[3]; a[0] = a[1]; }", "arrays"), 3);
        assert_eq!(count("int m[2][2];", "arrays"), 2);
    }

    #[test]
    fn bitfields_only_in_struct_bodies() {
        assert_eq!(count("struct S { int a : 3; };", "bitfields"), 1);
        assert_eq!(count("void f(int c) { int x = c ? 1 : 2; }", "bitfields"), 0);
        assert_eq!(
            count("void f(int c) { switch (c) { case 1: break; } }", "bitfields"),
            0
        );
    }

    #[test]
    fn comma_operator_contexts() {
        assert_eq!(count("void f(int a, int b) { int x = (a, b); }", "comma-operators"), 1);
        assert_eq!(count("void g(int a, int b);", "comma-operators"), 0);
        assert_eq!(count("int a[] = {1, 2};", "comma-operators"), 0);
    }

    #[test]
    fn compound_assignment_ops() {
        let src = "void f(int x) { x += 1; x <<= 2; x ^= 3; }";
        assert_eq!(count(src, "compound-assignment"), 3);
        assert_eq!(count("void f(int x) { x = x + 1; }", "compound-assignment"), 0);
    }

    #[test]
    fn divs_binary_only() {
        assert_eq!(count("int g = 10 / 2;", "divs"), 1);
        assert_eq!(count("void f(int a, int b) { int c = a % b; }", "divs"), 1);
    }

    #[test]
    fn incr_decr_classification() {
        assert_eq!(count("void f(int i) { i++; }", "post-incr-operator"), 1);
        assert_eq!(count("void f(int i) { ++i; }", "pre-incr-operator"), 1);
        assert_eq!(count("void f(int i) { i--; }", "post-decr-operator"), 1);
        assert_eq!(count("void f(int i) { --i; }", "pre-decr-operator"), 1);
        // maximal munch: a+++b is a++ + b
        let src = "void f(int a, int b) { int c = a+++b; }";
        assert_eq!(count(src, "post-incr-operator"), 1);
        assert_eq!(count(src, "pre-incr-operator"), 0);
    }

    #[test]
    fn unary_plus_contexts() {
        assert_eq!(count("int g = +5;", "unary-plus-operator"), 1);
        assert_eq!(count("void f(int a) { int b = a + 1; }", "unary-plus-operator"), 0);
        assert_eq!(count("void f(int a) { g(+a); }", "unary-plus-operator"), 1);
    }

    #[test]
    fn muls_vs_pointers() {
        assert_eq!(count("void f(int a, int b) { int c = a * b; }", "muls"), 1);
        assert_eq!(count("void f(int a, int b) { int c = a * b; }", "pointers"), 0);
        assert_eq!(count("int *p;", "pointers"), 1);
        assert_eq!(count("int *p;", "muls"), 0);
        assert_eq!(count("char **v;", "pointers"), 2);
        assert_eq!(count("struct S *p;", "pointers"), 1);
        assert_eq!(count("int8_t *p;", "pointers"), 1);
    }

    #[test]
    fn pointer_address_of_and_arrow() {
        assert_eq!(count("void f(int x) { int *p = &x; }", "pointers"), 2);
        assert_eq!(count("int h(struct S *s) { return s->field; }", "pointers"), 2);
        assert_eq!(count("void f(int a, int b) { int c = a & b; }", "pointers"), 0);
    }

    #[test]
    fn qualified_pointers() {
        assert_eq!(count("volatile int *p;", "volatile-pointers"), 1);
        assert_eq!(count("volatile int *p;", "volatiles"), 1);
        assert_eq!(count("int * volatile p;", "volatile-pointers"), 1);
        assert_eq!(count("const char *s;", "const-pointers"), 1);
        assert_eq!(count("int * const p;", "const-pointers"), 1);
        assert_eq!(count("volatile int v; int *p;", "volatile-pointers"), 0);
        assert_eq!(count("const int c; int *p;", "const-pointers"), 0);
    }

    #[test]
    fn globals_vs_functions() {
        assert_eq!(count("int g;", "global-variables"), 1);
        assert_eq!(count("int g = 5;", "global-variables"), 1);
        assert_eq!(count("static int a[2] = {1, 2};", "global-variables"), 1);
        assert_eq!(count("int f(void);", "global-variables"), 0);
        assert_eq!(count("int f(void) { return 0; }", "global-variables"), 0);
        assert_eq!(count("struct S { int x; };", "global-variables"), 0);
        assert_eq!(count("struct S { int x; } s;", "global-variables"), 1);
        assert_eq!(count("typedef int myint;", "global-variables"), 0);
        assert_eq!(count("int (*fp)(void);", "global-variables"), 1);
        assert_eq!(count("void f(void) { int local; }", "global-variables"), 0);
    }

    #[test]
    fn packed_struct_attribute() {
        let src = "struct __attribute__((packed)) S { int a; };";
        assert_eq!(count(src, "packed-struct"), 1);
        assert_eq!(count("struct __attribute__((__packed__)) T { int a; };", "packed-struct"), 1);
        assert_eq!(count("struct S { int packed; };", "packed-struct"), 0);
    }

    #[test]
    fn attribute_args_do_not_leak() {
        // the comma in the attribute argument list is not a comma operator
        let src = "int g __attribute__((aligned(4), unused));";
        assert_eq!(count(src, "comma-operators"), 0);
        assert_eq!(count(src, "global-variables"), 1);
    }

    #[test]
    fn consts_counted_everywhere() {
        assert_eq!(count("const int c = 1;", "consts"), 1);
        assert_eq!(count("const char * const p;", "consts"), 2);
    }
}
