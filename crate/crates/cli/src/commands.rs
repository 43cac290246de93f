use std::io::Write;
use std::time::Instant;

use jstego_core::key::StegoKey;
use jstego_core::lattice::ScanStrategy;
use jstego_core::pgm::write_pgm;
use jstego_core::pipeline::{embed, embed_simulated, extract, schedule_for, ChannelSpec, EmbedOptions, ExtractOptions, Spread};
use jstego_core::robustness::{initial_robust_map, RobustnessMap};
use jstego_core::synth::{generate, Family};
use jstego_core::{stream, CoefficientPlane, Recompressor, StegoError};

use crate::args::{
    ChannelArgs, Cli, Command, CompressArgs, EmbedArgs, ExtractArgs, FamilyArg, RobustMapArgs, SpreadArg, SynthArgs,
};
use crate::exit::{io_at, CliError, CliResult};
use crate::input::{load_cover, parse_filter, parse_key, read_jpeg, write_file};
use crate::report::{EmbedRun, Timing, ROBUST_MAP_HEADER, SCHEMA_VERSION};

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Embed(a) => cmd_embed(a),
        Command::Extract(a) => cmd_extract(a),
        Command::RobustMap(a) => cmd_robust_map(a),
        Command::SuccessRate(a) => crate::grid::cmd_success_rate(a),
        Command::Compress(a) => cmd_compress(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

pub fn spread_of(s: SpreadArg) -> Spread {
    match s {
        SpreadArg::InitialMap => Spread::InitialMap,
        SpreadArg::Equal => Spread::Equal,
    }
}

fn channel_of(args: &ChannelArgs) -> CliResult<ChannelSpec> {
    let filter = parse_filter(args.filter.as_deref())?;
    Ok(match &args.channel_external {
        Some(cmd) => ChannelSpec::external(cmd.clone(), filter),
        None => ChannelSpec::internal(filter),
    })
}

fn cmd_embed(a: EmbedArgs) -> CliResult<()> {
    let start = Instant::now();
    let cover = load_cover(&a.cover)?;
    let key = parse_key(&a.key)?;
    let opts = EmbedOptions {
        strategy: a.scheme.strategy.parse()?,
        channel: channel_of(&a.channel)?,
        cost_model: a.cost_model.clone(),
        height: a.scheme.height,
        spread: spread_of(a.spread),
        ..EmbedOptions::default()
    };
    let message = a.message.as_ref().map(|p| io_at(std::fs::read(p), p)).transpose()?;
    let nzac = cover.nonzero_ac();

    let (embedding, mode, bits) = match a.simulate {
        Some(seed) => {
            let bits = match (&message, a.bits, a.rate) {
                (Some(m), _, _) => 8.0 * m.len() as f64,
                (None, Some(b), _) => b,
                (None, None, Some(r)) => r * nzac as f64,
                _ => unreachable!("clap requires a payload"),
            };
            (embed_simulated(&cover, bits, &key, &opts, seed)?, "simulated", bits)
        }
        None => {
            let m = message.as_deref().unwrap_or_default();
            (embed(&cover, m, &key, &opts)?, "coded", 8.0 * m.len() as f64)
        }
    };

    write_file(&a.output, &stream::serialize(&embedding.stego)?)?;
    let report = embedding.report;
    if let Some(path) = &a.report {
        let run = EmbedRun {
            schema_version: SCHEMA_VERSION,
            input: a.cover.input.display().to_string(),
            output: a.output.display().to_string(),
            blocks: cover.num_blocks(),
            nonzero_ac: nzac,
            mode: mode.into(),
            cost_model: opts.cost_model.clone(),
            spread: serde_json::to_value(opts.spread).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
            filter: opts.channel.filter.as_ref().map(ToString::to_string),
            channel: match &opts.channel.coder {
                jstego_core::pipeline::Coder::Internal => "internal".into(),
                jstego_core::pipeline::Coder::External { command } => command.clone(),
            },
            capacity_bpc: report.capacity_bits.map(|c| c / cover.num_coefficients() as f64),
            payload_bpnzac: if nzac > 0 { bits / nzac as f64 } else { 0.0 },
            success: mode == "coded" && report.verified,
            embedding: report.clone(),
            timing: Timing { seconds: start.elapsed().as_secs_f64() },
        };
        let json = serde_json::to_string_pretty(&run).expect("report serializes");
        write_file(path, json.as_bytes())?;
    }
    eprintln!(
        "{mode} embedding: {} bits, {} flips, {} compressor calls{}",
        report.message_bits,
        report.flips,
        report.compressor_calls,
        if report.verified { ", verified" } else { "" }
    );
    Ok(())
}

fn cmd_extract(a: ExtractArgs) -> CliResult<()> {
    let received = read_jpeg(&a.input)?;
    let key = parse_key(&a.key)?;
    let opts = ExtractOptions { strategy: a.scheme.strategy.parse()?, filtered: a.filtered, height: a.scheme.height };
    let message = extract(&received, &key, &opts)?;
    write_file(&a.output, &message)
}

/// Key for schedule resolution; only a keyed random order needs a real one.
fn schedule_key(hex: Option<&str>, strategy: ScanStrategy) -> CliResult<StegoKey> {
    match (hex, strategy) {
        (Some(h), _) => Ok(parse_key(h)?),
        (None, ScanStrategy::Random { seed: 0 }) => {
            Err(StegoError::InvalidKey("a key or random:<seed> is needed for the random strategy".into()).into())
        }
        (None, _) => Ok(StegoKey::new(*b"unkeyed")?),
    }
}

fn robust_maps(plane: &CoefficientPlane, a: &RobustMapArgs) -> CliResult<Vec<RobustnessMap>> {
    let strategy: ScanStrategy = a.scheme.strategy.parse()?;
    let key = schedule_key(a.key.as_deref(), strategy)?;
    let filter = parse_filter(a.filter.as_deref())?;
    let schedule = schedule_for(plane, strategy, &key, filter.is_some());
    Ok(initial_robust_map(plane, &schedule, &Recompressor::new(filter))?)
}

fn cmd_robust_map(a: RobustMapArgs) -> CliResult<()> {
    let cover = load_cover(&a.cover)?;
    let mut stages = vec![("initial", robust_maps(&cover, &a)?)];
    if let Some(post) = &a.post {
        stages.push(("post", robust_maps(&read_jpeg(post)?, &a)?));
    }
    let sink: Box<dyn Write> = match &a.output {
        Some(p) => Box::new(io_at(std::fs::File::create(p), p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let csv_err = |e: csv::Error| CliError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(ROBUST_MAP_HEADER).map_err(csv_err)?;
    for (stage, maps) in &stages {
        for m in maps {
            let c = m.counts();
            w.write_record([
                stage.to_string(),
                m.lattice.to_string(),
                c.both.to_string(),
                c.plus_only.to_string(),
                c.minus_only.to_string(),
                c.non_robust.to_string(),
                format!("{:.6}", c.robust_fraction()),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

fn cmd_compress(a: CompressArgs) -> CliResult<()> {
    let plane = load_cover(&a.cover)?;
    write_file(&a.output, &stream::serialize(&plane)?)
}

fn cmd_synth(a: SynthArgs) -> CliResult<()> {
    if a.size == 0 || !a.size.is_multiple_of(8) {
        return Err(StegoError::InvalidImage(format!("size {} is not a positive multiple of 8", a.size)).into());
    }
    let family = match a.family {
        FamilyArg::Fractal => Family::Fractal,
        FamilyArg::Waves => Family::Waves,
        FamilyArg::Shapes => Family::Shapes,
        FamilyArg::Gradient => Family::Gradient,
        FamilyArg::Saturated => Family::Saturated,
    };
    write_file(&a.output, &write_pgm(&generate(family, a.seed, a.size).pixels))
}
