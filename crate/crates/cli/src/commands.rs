use std::fs::File;
use std::io::{self, BufWriter, Write};

use anyhow::Context as _;
use painleve_torus::gle::{classify, is_unitary, monodromy_with, MonodromyOptions};
use painleve_torus::green::{find_critical_points_with, CriticalKind};
use painleve_torus::hitchin::{
    epvi_residual, hamiltonian_flow_with, omega_membership, omega_scan, solution_p, solution_state,
    z_rs,
};
use painleve_torus::ode::OdeOptions;
use painleve_torus::output::{
    field_header_json, fmt_real, region_json, write_field_csv, write_region_csv,
};
use painleve_torus::synth::{eigenbasis_with, u_field};
use painleve_torus::{
    Complex64, Context, ContextFamily, GLEParams, MonodromyClass, MonodromyParams, PVIIndex,
    SingularPair, Tau,
};

use crate::doc::{reals, Obj};
use crate::{Command, Invocation, OutputFormat, RunConfig, UsageError};

struct Env<'a> {
    cfg: &'a RunConfig,
    family: ContextFamily,
}

impl Env<'_> {
    fn ctx(&self, tau: Complex64) -> painleve_torus::Result<Context> {
        self.family.at(tau)
    }

    fn ode(&self) -> OdeOptions<f64> {
        OdeOptions::with_tolerances(self.cfg.ode_rel_tol, self.cfg.ode_rel_tol * 1e-2)
    }
}

type CsvWriter = Box<dyn FnOnce(&mut dyn Write) -> anyhow::Result<()>>;

enum Output {
    Json(String),
    Csv(CsvWriter),
    Text(String),
}

pub(crate) fn execute(inv: &Invocation) -> anyhow::Result<()> {
    let cfg = &inv.config;
    let env = Env {
        cfg,
        family: ContextFamily {
            tol: cfg.tolerance,
            series_tol: cfg.series_tol,
        },
    };
    let csv = cfg.output_format == OutputFormat::Csv;
    let csv_capable = matches!(
        inv.command,
        Command::GreenCrit { .. }
            | Command::PviFlow { .. }
            | Command::OmegaScan { .. }
            | Command::Synth { .. }
            | Command::EpviCheck { .. }
    );
    if csv && !csv_capable {
        return Err(UsageError(format!(
            "csv output is not available for `{}`",
            inv.command.name()
        ))
        .into());
    }
    let output = match &inv.command {
        Command::Ctx { tau } => Output::Json(ctx_cmd(&env, tau.tau)?),
        Command::Eval { tau, z } => Output::Json(eval_cmd(&env, tau.tau, *z)?),
        Command::GreenCrit { tau, p, seeds } => green_cmd(&env, tau.tau, *p, *seeds, csv)?,
        Command::Hitchin { tau, rs, h } => {
            Output::Json(explicit_cmd(&env, tau.tau, rs.r, rs.s, PVIIndex::ZERO, *h)?)
        }
        Command::Okamoto { tau, rs, h } => Output::Json(explicit_cmd(
            &env,
            tau.tau,
            rs.r,
            rs.s,
            PVIIndex::ONE_000,
            *h,
        )?),
        Command::EpviCheck { tau, rs, index, h } => {
            let mp = MonodromyParams::real(rs.r, rs.s)?;
            let res = epvi_residual(&env.family, &mp, index.n, Tau::new(tau.tau)?, *h)?;
            Output::Text(fmt_real(res))
        }
        Command::PviFlow {
            tau,
            rs,
            index,
            tau_end,
            steps,
            h,
        } => flow_cmd(
            &env, tau.tau, rs.r, rs.s, index.n, *tau_end, *steps, *h, csv,
        )?,
        Command::Mono {
            tau,
            r,
            s,
            p,
            a,
            index,
            q0,
            h,
        } => {
            let source = match (r, s, p, a) {
                (Some(r), Some(s), _, _) => Source::Rs(*r, *s, *h),
                (_, _, Some(p), Some(a)) => Source::State(*p, *a),
                _ => return Err(UsageError("give --r/--s or --p/--a".into()).into()),
            };
            Output::Json(mono_cmd(&env, tau.tau, source, index.n, *q0)?)
        }
        Command::OmegaTest { tau, p, index } => {
            Output::Json(omega_test_cmd(&env, tau.tau, *p, index.n)?)
        }
        Command::OmegaScan { tau, index, res } => {
            let ctx = env.ctx(tau.tau)?;
            let sample = omega_scan(&ctx, index.n, *res)?;
            if csv {
                Output::Csv(Box::new(move |w| Ok(write_region_csv(&sample, w)?)))
            } else {
                Output::Json(region_json(&sample)?)
            }
        }
        Command::Synth {
            tau,
            rs,
            index,
            res,
            beta,
            h,
        } => synth_cmd(&env, tau.tau, rs.r, rs.s, index.n, *res, *beta, *h, csv)?,
    };
    emit(inv, output)
}

fn emit(inv: &Invocation, output: Output) -> anyhow::Result<()> {
    let mut sink: Box<dyn Write> = match &inv.out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).map_err(|e| {
                UsageError(format!("cannot create {}: {e}", path.display()))
            })?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match output {
        Output::Json(s) | Output::Text(s) => writeln!(sink, "{s}")?,
        Output::Csv(f) => f(&mut sink)?,
    }
    sink.flush().context("writing output")?;
    Ok(())
}

fn ctx_cmd(env: &Env, tau: Complex64) -> anyhow::Result<String> {
    let ctx = env.ctx(tau)?;
    let res = ctx.residuals();
    let residuals = Obj::new()
        .real("e_sum", res.e_sum)
        .real("legendre", res.legendre)
        .real("g2", res.g2)
        .real("g3", res.g3);
    Ok(Obj::new()
        .cx("tau", ctx.tau_value())
        .cx("nome_q", ctx.nome_q)
        .cx("eta1", ctx.eta1)
        .cx("eta2", ctx.eta2)
        .cx("e1", ctx.e1)
        .cx("e2", ctx.e2)
        .cx("e3", ctx.e3)
        .cx("g2", ctx.g2)
        .cx("g3", ctx.g3)
        .val("series_cutoff", &ctx.series_cutoff)
        .val("residuals", &residuals)
        .finish())
}

fn eval_cmd(env: &Env, tau: Complex64, z: Complex64) -> anyhow::Result<String> {
    let ctx = env.ctx(tau)?;
    let v = ctx.values(z)?;
    let pt = ctx.lattice_reduce(z);
    Ok(Obj::new()
        .cx("tau", ctx.tau_value())
        .cx("z", z)
        .raw("rs", reals(&[pt.r, pt.s]))
        .cx("wp", v.wp)
        .cx("dwp", v.dwp)
        .cx("zeta", v.zeta)
        .finish())
}

fn green_cmd(
    env: &Env,
    tau: Complex64,
    p: Option<Complex64>,
    seeds: usize,
    csv: bool,
) -> anyhow::Result<Output> {
    let ctx = env.ctx(tau)?;
    let pair = p.map(|p| SingularPair::new(&ctx, p)).transpose()?;
    let points = find_critical_points_with(
        &ctx,
        pair.as_ref(),
        seeds,
        env.cfg.newton_max_iter,
        env.cfg.tolerance,
    )?;
    let kind = |k: CriticalKind| match k {
        CriticalKind::Trivial => "trivial",
        CriticalKind::Nontrivial => "nontrivial",
    };
    if csv {
        return Ok(Output::Csv(Box::new(move |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["z_re", "z_im", "r", "s", "kind", "residual", "hessian_det"])?;
            for cp in &points {
                out.write_record([
                    fmt_real(cp.location.z.re),
                    fmt_real(cp.location.z.im),
                    fmt_real(cp.location.r),
                    fmt_real(cp.location.s),
                    kind(cp.kind).to_owned(),
                    fmt_real(cp.residual),
                    fmt_real(cp.hessian_det),
                ])?;
            }
            out.flush()?;
            Ok(())
        })));
    }
    let rows: Vec<Obj> = points
        .iter()
        .map(|cp| {
            Obj::new()
                .cx("z", cp.location.z)
                .raw("rs", reals(&[cp.location.r, cp.location.s]))
                .val("kind", kind(cp.kind))
                .real("residual", cp.residual)
                .real("hessian_det", cp.hessian_det)
        })
        .collect();
    let doc = Obj::new().cx("tau", ctx.tau_value());
    let doc = match pair {
        Some(pair) => doc.cx("p", pair.p.z),
        None => doc.val("p", &()),
    };
    Ok(Output::Json(doc.val("critical_points", &rows).finish()))
}

fn explicit_cmd(
    env: &Env,
    tau: Complex64,
    r: f64,
    s: f64,
    index: PVIIndex,
    h: f64,
) -> anyhow::Result<String> {
    let ctx = env.ctx(tau)?;
    let mp = MonodromyParams::real(r, s)?;
    let z = z_rs(&ctx, &mp)?;
    let (p, wp) = solution_p(&ctx, &mp, index)?;
    let state = solution_state(&env.family, &mp, index, Tau::new(tau)?, h)?;
    Ok(Obj::new()
        .cx("tau", ctx.tau_value())
        .val("index", &index.n)
        .raw("rs", reals(&[r, s]))
        .cx("z_rs", z)
        .cx("p", p.z)
        .raw("p_rs", reals(&[p.r, p.s]))
        .cx("wp_p", wp)
        .cx("a", state.a)
        .cx("b", state.b)
        .finish())
}

#[allow(clippy::too_many_arguments)]
fn flow_cmd(
    env: &Env,
    tau: Complex64,
    r: f64,
    s: f64,
    index: PVIIndex,
    tau_end: Complex64,
    steps: usize,
    h: f64,
    csv: bool,
) -> anyhow::Result<Output> {
    let mp = MonodromyParams::real(r, s)?;
    let start = solution_state(&env.family, &mp, index, Tau::new(tau)?, h)?;
    let (states, stats) = hamiltonian_flow_with(
        &env.family,
        index,
        &start,
        Tau::new(tau_end)?,
        steps,
        &env.ode(),
    )?;
    // Distance to the explicit solution at the same τ, up to the sign of p.
    let gaps: Vec<f64> = states
        .iter()
        .map(|st| {
            let ctx = env.ctx(st.tau.value())?;
            let (pe, _) = solution_p(&ctx, &mp, index)?;
            Ok(ctx.torus_dist(st.p, pe.z).min(ctx.torus_dist(st.p, -pe.z)))
        })
        .collect::<painleve_torus::Result<_>>()?;
    if csv {
        return Ok(Output::Csv(Box::new(move |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record([
                "tau_re",
                "tau_im",
                "p_re",
                "p_im",
                "a_re",
                "a_im",
                "b_re",
                "b_im",
                "explicit_gap",
            ])?;
            for (st, gap) in states.iter().zip(&gaps) {
                let t = st.tau.value();
                out.write_record(
                    [
                        t.re, t.im, st.p.re, st.p.im, st.a.re, st.a.im, st.b.re, st.b.im, *gap,
                    ]
                    .map(fmt_real),
                )?;
            }
            out.flush()?;
            Ok(())
        })));
    }
    let rows: Vec<Obj> = states
        .iter()
        .zip(&gaps)
        .map(|(st, gap)| {
            Obj::new()
                .cx("tau", st.tau.value())
                .cx("p", st.p)
                .cx("a", st.a)
                .cx("b", st.b)
                .real("explicit_gap", *gap)
        })
        .collect();
    let ode = Obj::new()
        .val("accepted", &stats.accepted)
        .val("rejected", &stats.rejected)
        .val("evaluations", &stats.evaluations);
    Ok(Output::Json(
        Obj::new()
            .val("index", &index.n)
            .raw("rs", reals(&[r, s]))
            .val("states", &rows)
            .val("ode", &ode)
            .finish(),
    ))
}

enum Source {
    Rs(f64, f64, f64),
    State(Complex64, Complex64),
}

fn gle_params(
    env: &Env,
    ctx: &Context,
    source: &Source,
    index: PVIIndex,
) -> painleve_torus::Result<GLEParams> {
    match *source {
        Source::Rs(r, s, h) => {
            let mp = MonodromyParams::real(r, s)?;
            let state = solution_state(&env.family, &mp, index, ctx.tau, h)?;
            GLEParams::from_state(ctx, index, &state)
        }
        Source::State(p, a) => GLEParams::new(ctx, index, p, a),
    }
}

fn mono_options(env: &Env, q0: Option<Complex64>) -> MonodromyOptions<f64> {
    MonodromyOptions {
        q0,
        clearance: env.cfg.clearance,
        ode: env.ode(),
    }
}

fn mono_cmd(
    env: &Env,
    tau: Complex64,
    source: Source,
    index: PVIIndex,
    q0: Option<Complex64>,
) -> anyhow::Result<String> {
    let ctx = env.ctx(tau)?;
    let g = gle_params(env, &ctx, &source, index)?;
    let rep = monodromy_with(&ctx, &g, &mono_options(env, q0))?;
    let class = match classify(&rep)? {
        MonodromyClass::CompletelyReducible { r, s } => Obj::new()
            .val("kind", "completely_reducible")
            .cx("r", r)
            .cx("s", s),
        MonodromyClass::NotCompletelyReducible { eps1, eps2, c } => {
            let doc = Obj::new()
                .val("kind", "not_completely_reducible")
                .val("eps1", &eps1)
                .val("eps2", &eps2);
            match c {
                Some(c) => doc.cx("c", c),
                None => doc.val("c", "infinity"),
            }
        }
    };
    let recovered = is_unitary(&rep, 1e-6);
    let res = rep.residuals();
    let residuals = Obj::new()
        .real("det_n1", res.det_n1)
        .real("det_n2", res.det_n2)
        .real("det_gamma_plus", res.det_gamma_plus)
        .real("det_gamma_minus", res.det_gamma_minus)
        .real("commutator", res.commutator)
        .real("gamma_plus", res.gamma_plus)
        .real("gamma_minus", res.gamma_minus);
    let doc = Obj::new()
        .cx("tau", ctx.tau_value())
        .val("index", &index.n)
        .cx("p", g.p.z)
        .cx("a", g.a)
        .cx("b", g.b)
        .cx("basepoint", rep.basepoint)
        .real("clearance", rep.clearance)
        .mat("n1", &rep.n1)
        .mat("n2", &rep.n2)
        .mat("gamma_plus", &rep.gamma_plus)
        .mat("gamma_minus", &rep.gamma_minus)
        .val("residuals", &residuals)
        .val("class", &class);
    let doc = match recovered {
        Some((r, s)) => doc.raw("recovered_rs", reals(&[r, s])),
        None => doc.val("recovered_rs", &()),
    };
    Ok(doc.finish())
}

fn omega_test_cmd(
    env: &Env,
    tau: Complex64,
    p: Complex64,
    index: PVIIndex,
) -> anyhow::Result<String> {
    let ctx = env.ctx(tau)?;
    let pair = SingularPair::new(&ctx, p)?;
    let witness = omega_membership(&ctx, &pair, index)?;
    let doc = Obj::new()
        .cx("tau", ctx.tau_value())
        .cx("p", pair.p.z)
        .val("index", &index.n)
        .val("member", &witness.is_some());
    let doc = match witness {
        Some(w) => doc.val(
            "witness",
            &Obj::new()
                .raw("rs", reals(&[w.params.r.re, w.params.s.re]))
                .real("residual", w.residual),
        ),
        None => doc.val("witness", &()),
    };
    Ok(doc.finish())
}

#[allow(clippy::too_many_arguments)]
fn synth_cmd(
    env: &Env,
    tau: Complex64,
    r: f64,
    s: f64,
    index: PVIIndex,
    res: usize,
    beta: f64,
    h: f64,
    csv: bool,
) -> anyhow::Result<Output> {
    let ctx = env.ctx(tau)?;
    let g = gle_params(env, &ctx, &Source::Rs(r, s, h), index)?;
    let rep = monodromy_with(&ctx, &g, &mono_options(env, None))?;
    let basis = eigenbasis_with(&ctx, &g, &rep, &env.ode())?;
    let field = u_field(&ctx, &g, &basis, res, beta)?;
    if csv {
        return Ok(Output::Csv(Box::new(move |w| {
            Ok(write_field_csv(&field, w)?)
        })));
    }
    let header = serde_json::value::RawValue::from_string(field_header_json(&field)?)?;
    let rows: Vec<_> = field.u.chunks(field.resolution).map(reals).collect();
    Ok(Output::Json(
        Obj::new().raw("header", header).val("u", &rows).finish(),
    ))
}
