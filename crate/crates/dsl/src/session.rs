//! Sequential evaluation of statements against a catalog and name bindings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use vca_core::algebra::{aggregate_operand, compose_binary, explode, extract, union_operands};
use vca_core::{
    cell_operand, constant_operand, ingest_csv, legend_operand, lift, make_view, marks_of, marks_operand, BinaryOp,
    Context, Operand, Relation, View, ViewSet, ViewSpec, Warning,
};

use crate::ast::{Expr, Located, Statement, ViewDef};
use crate::error::{DslError, Result};
use crate::parser::parse;
use crate::render;

/// What one statement did.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub statement: Statement,
    /// Name bound by the statement, if any.
    pub binding: Option<String>,
    /// Text for the user: a one-line summary, or the full `show` / SQL output.
    pub output: String,
    /// Warnings attached to the produced value.
    pub warnings: Vec<Warning>,
    /// Session-level notes, e.g. a name being rebound.
    pub notices: Vec<String>,
}

pub struct Session {
    ctx: Context,
    bindings: BTreeMap<String, Operand>,
    log: Vec<Statement>,
    base_dir: PathBuf,
}

impl Session {
    pub fn new(base_dir: impl Into<PathBuf>) -> Self {
        Self::with_context(Context::new(Default::default()), base_dir)
    }

    pub fn with_context(ctx: Context, base_dir: impl Into<PathBuf>) -> Self {
        Session {
            ctx,
            bindings: BTreeMap::new(),
            log: Vec::new(),
            base_dir: base_dir.into(),
        }
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn register_table(&mut self, name: impl Into<String>, rel: Relation) {
        self.ctx.catalog.register(name, rel);
    }

    pub fn bindings(&self) -> &BTreeMap<String, Operand> {
        &self.bindings
    }

    pub fn get(&self, name: &str) -> Option<&Operand> {
        self.bindings.get(name)
    }

    /// Successfully evaluated statements, in order.
    pub fn log(&self) -> &[Statement] {
        &self.log
    }

    pub fn log_script(&self) -> String {
        crate::ast::print_script(&self.log)
    }

    /// Parses and evaluates `src`, stopping at the first failing statement.
    pub fn run_script(&mut self, src: &str) -> Result<Vec<Outcome>> {
        parse(src)?.iter().map(|st| self.eval(st)).collect()
    }

    /// Runs `stmts` in a fresh session over the same base directory.
    pub fn replay(stmts: &[Statement], ctx: Context, base_dir: impl Into<PathBuf>) -> Result<Session> {
        let mut s = Session::with_context(ctx, base_dir);
        for st in stmts {
            s.eval(&Located {
                stmt: st.clone(),
                line: 0,
                column: 0,
            })?;
        }
        Ok(s)
    }

    pub fn eval(&mut self, located: &Located) -> Result<Outcome> {
        let checkpoint = self.ctx.id_checkpoint();
        let out = self.eval_inner(located);
        match &out {
            Ok(_) => self.log.push(located.stmt.clone()),
            Err(_) => self.ctx.restore_ids(checkpoint),
        }
        out
    }

    fn eval_inner(&mut self, located: &Located) -> Result<Outcome> {
        let (line, column) = (located.line, located.column);
        let engine = |source| DslError::Engine { source, line, column };
        let mut out = Outcome {
            statement: located.stmt.clone(),
            binding: None,
            output: String::new(),
            warnings: Vec::new(),
            notices: Vec::new(),
        };
        match &located.stmt {
            Statement::Load { name, path, roles } => {
                let full = resolve(&self.base_dir, path);
                let file = std::fs::File::open(&full).map_err(|source| DslError::Io {
                    path: full.display().to_string(),
                    source,
                })?;
                let roles: BTreeMap<String, String> = roles.iter().cloned().collect();
                let rel = ingest_csv(file, &roles).map_err(engine)?;
                if self.ctx.catalog.get(name).is_ok() {
                    out.notices.push(format!("table `{name}` replaced"));
                }
                out.output = format!("{name}: table with {} rows", rel.len());
                self.ctx.catalog.register(name.clone(), rel);
            }
            Statement::DefView { name, def } => {
                let mut v = self.view(def, line, column)?;
                if def.title.is_none() {
                    v.title = name.clone();
                }
                self.bind(name, Operand::View(v), &mut out);
            }
            Statement::Assign { name, expr } => {
                let value = self.expr(expr, line, column)?;
                self.bind(name, value, &mut out);
            }
            Statement::Show { name } => {
                let op = self.lookup(name, line, column)?;
                out.output = render::show(&self.ctx, op).map_err(engine)?;
            }
            Statement::EmitSql { name } => {
                let op = self.lookup(name, line, column)?;
                let mut text = String::new();
                for (label, sql) in render::sql(&self.ctx, op).map_err(engine)? {
                    text.push_str(&format!("-- {label}\n{sql};\n"));
                }
                out.output = text;
            }
        }
        Ok(out)
    }

    /// Evaluates an expression without binding it. Ids handed out by a
    /// failed evaluation are returned to the pool.
    pub fn evaluate(&self, e: &Expr) -> Result<Operand> {
        let checkpoint = self.ctx.id_checkpoint();
        let out = self.expr(e, 0, 0);
        if out.is_err() {
            self.ctx.restore_ids(checkpoint);
        }
        out
    }

    /// Binds an already evaluated `value`, logging `name = expr` when the
    /// expression is given.
    pub fn define(&mut self, name: &str, value: Operand, expr: Option<Expr>) {
        self.bindings.insert(name.to_string(), value);
        if let Some(expr) = expr {
            self.log.push(Statement::Assign {
                name: name.to_string(),
                expr,
            });
        }
    }

    fn bind(&mut self, name: &str, value: Operand, out: &mut Outcome) {
        out.warnings = warnings_of(&value);
        out.output = format!("{name} = {}", summary(&value));
        if self.bindings.contains_key(name) {
            out.notices
                .push(format!("`{name}` rebound; the previous value is shadowed"));
        }
        out.binding = Some(name.to_string());
        self.bindings.insert(name.to_string(), value);
    }

    fn lookup(&self, name: &str, line: usize, column: usize) -> Result<&Operand> {
        self.bindings.get(name).ok_or_else(|| DslError::Name {
            name: name.to_string(),
            line,
            column,
        })
    }

    fn view(&self, def: &ViewDef, line: usize, column: usize) -> Result<View> {
        let spec = ViewSpec {
            table: def.table.clone(),
            filter: def.filter.clone(),
            group_attrs: def.group.clone(),
            func: def.func,
            attr: def.attr.clone(),
            mark: def.mark.unwrap_or(vca_core::MarkType::Bar),
            channels: if def.channels.is_empty() {
                None
            } else {
                Some(def.channels.iter().cloned().collect())
            },
            title: def.title.clone(),
        };
        make_view(&self.ctx, &spec).map_err(|source| DslError::Engine { source, line, column })
    }

    fn single(&self, e: &Expr, line: usize, column: usize) -> Result<View> {
        let engine = |source| DslError::Engine { source, line, column };
        match self.expr(e, line, column)? {
            Operand::View(v) => Ok(v),
            Operand::Model(m) => m.to_view(&self.ctx).map_err(engine),
            Operand::Constant(c) => c.to_view(&self.ctx).map_err(engine),
            Operand::Set(_) => Err(DslError::Usage {
                message: format!("`{e}` is a viewset; a single view is needed here"),
                line,
                column,
            }),
        }
    }

    fn expr(&self, e: &Expr, line: usize, column: usize) -> Result<Operand> {
        let ctx = &self.ctx;
        let engine = |source| DslError::Engine { source, line, column };
        Ok(match e {
            Expr::Name(n) => self.lookup(n, line, column)?.clone(),
            Expr::Set(xs) => {
                let mut views = Vec::new();
                for x in xs {
                    match self.expr(x, line, column)? {
                        Operand::View(v) => views.push(v),
                        Operand::Set(s) => views.extend(s.into_views()),
                        other => {
                            return Err(DslError::Usage {
                                message: format!("a viewset cannot contain a {}", other.kind_name()),
                                line,
                                column,
                            })
                        }
                    }
                }
                Operand::Set(ViewSet::new(views).map_err(engine)?)
            }
            Expr::Const(x) => Operand::Constant(constant_operand(*x).map_err(engine)?),
            Expr::Binary {
                op,
                left,
                right,
                override_flag,
            } => {
                let (l, r) = (self.expr(left, line, column)?, self.expr(right, line, column)?);
                compose_binary(ctx, &l, &r, &BinaryOp::Arith(*op), *override_flag).map_err(engine)?
            }
            Expr::Combine {
                left,
                right,
                expr,
                override_flag,
            } => {
                let op = BinaryOp::custom(expr.clone()).map_err(engine)?;
                let (l, r) = (self.expr(left, line, column)?, self.expr(right, line, column)?);
                compose_binary(ctx, &l, &r, &op, *override_flag).map_err(engine)?
            }
            Expr::Union { args, override_flag } => {
                let ops = args
                    .iter()
                    .map(|a| self.expr(a, line, column))
                    .collect::<Result<Vec<_>>>()?;
                Operand::View(union_operands(ctx, &ops, *override_flag).map_err(engine)?)
            }
            Expr::Agg {
                func,
                arg,
                override_flag,
            } => {
                let a = self.expr(arg, line, column)?;
                Operand::View(aggregate_operand(ctx, *func, &a, *override_flag).map_err(engine)?)
            }
            Expr::Extract { view, pred } => {
                let v = self.single(view, line, column)?;
                Operand::View(extract(ctx, &v, pred.as_ref()).map_err(engine)?)
            }
            Expr::Explode { view, attrs } => {
                let v = self.single(view, line, column)?;
                Operand::Set(explode(ctx, &v, attrs).map_err(engine)?)
            }
            Expr::Lift { view, features, cond } => {
                let v = self.single(view, line, column)?;
                Operand::Model(lift(ctx, &v, features, cond).map_err(engine)?)
            }
            Expr::Legend { view, attr, value } => {
                let v = self.single(view, line, column)?;
                Operand::View(legend_operand(ctx, &v, attr, value).map_err(engine)?)
            }
            Expr::Marks { view, pred } => {
                let v = self.single(view, line, column)?;
                Operand::View(marks_operand(ctx, &v, pred).map_err(engine)?)
            }
            Expr::MarksOf(view) => {
                let v = self.single(view, line, column)?;
                Operand::Set(marks_of(ctx, &v).map_err(engine)?)
            }
            Expr::Cell { view, key } => {
                let v = self.single(view, line, column)?;
                let key: BTreeMap<_, _> = key.iter().cloned().collect();
                Operand::View(cell_operand(ctx, &v, &key).map_err(engine)?)
            }
            Expr::View(def) => Operand::View(self.view(def, line, column)?),
        })
    }
}

fn resolve(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn warnings_of(op: &Operand) -> Vec<Warning> {
    match op {
        Operand::View(v) => v.warnings.clone(),
        Operand::Set(s) => s.views().iter().flat_map(|v| v.warnings.clone()).collect(),
        Operand::Model(m) => m.warnings.clone(),
        Operand::Constant(_) => Vec::new(),
    }
}

fn summary(op: &Operand) -> String {
    match op {
        Operand::View(v) => format!("view {} \"{}\"", v.id.0, v.title),
        Operand::Set(s) => {
            let ids: Vec<&str> = s.views().iter().map(|v| v.id.0.as_str()).collect();
            format!("viewset of {} [{}]", s.len(), ids.join(", "))
        }
        Operand::Model(m) => format!("model view {} over {} group(s)", m.id.0, m.models.len()),
        Operand::Constant(c) => format!("constant {}", c.value),
    }
}
