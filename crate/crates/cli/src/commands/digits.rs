//! `train-digits` and `eval-digits`: the rendered-tile dataset and the
//! digit classifier that reads boards back off the screen.

use std::io::{self, Write};
use std::path::Path;

use anyhow::{ensure, Result};
use swipe48_core::exec::ExecMode;
use swipe48_core::nn::{self, Network};
use swipe48_core::vision::{
    build_dataset, evaluate_classifier, export_dataset, train_classifier, ClassifierEval,
    Dataset, RenderStyle, TrainOptions, CLASSIFIER_SIZES, TILE_CLASSES,
};

use crate::config::Config;
use crate::manifest::write_manifest;
use crate::RunArgs;

/// Consume the render-style keys shared by every vision command.
pub fn style_config(cfg: &mut Config) -> Result<RenderStyle> {
    let defaults = RenderStyle::default();
    Ok(RenderStyle {
        brightness: cfg.take_f64("brightness", defaults.brightness)?,
        noise_sigma: cfg.take_f64("noise_sigma", defaults.noise_sigma)?,
        translation: cfg.take_f64("translation", defaults.translation)?,
        rotation_deg: cfg.take_f64("rotation_deg", defaults.rotation_deg)?,
    })
}

pub fn load_digit_net(path: &Path) -> Result<Network> {
    let net = nn::load(path)?;
    ensure!(
        net.in_dim() == CLASSIFIER_SIZES[0] && net.out_dim() == TILE_CLASSES,
        "checkpoint {} is {}x{}, expected a {}-in {}-out tile classifier",
        path.display(),
        net.in_dim(),
        net.out_dim(),
        CLASSIFIER_SIZES[0],
        TILE_CLASSES
    );
    Ok(net)
}

fn write_accuracy<W: io::Write>(w: &mut W, rows: &[(&str, &ClassifierEval)]) -> io::Result<()> {
    writeln!(w, "split,tiles,correct,accuracy_pct")?;
    for (split, eval) in rows {
        writeln!(
            w,
            "{},{},{},{:.4}",
            split,
            eval.total,
            eval.correct,
            eval.accuracy() * 100.0
        )?;
    }
    Ok(())
}

fn write_confusion<W: io::Write>(w: &mut W, eval: &ClassifierEval) -> io::Result<()> {
    write!(w, "truth")?;
    for p in 0..TILE_CLASSES {
        write!(w, ",pred_{p}")?;
    }
    writeln!(w)?;
    for (truth, row) in eval.confusion.iter().enumerate() {
        write!(w, "{truth}")?;
        for count in row {
            write!(w, ",{count}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn build(cfg: &mut Config, seed: u64, style: &RenderStyle) -> Result<Dataset> {
    let n_boards = cfg.take_usize("n_boards", 877)?;
    let parallel = cfg.take_bool("parallel", true)?;
    ensure!(n_boards > 0, "n_boards must be positive");
    Ok(build_dataset(
        n_boards,
        seed,
        style,
        ExecMode::resolve(parallel),
    ))
}

pub fn run_train(args: &RunArgs) -> Result<()> {
    let mut cfg = Config::load(args.config.as_deref())?;
    let seed = cfg.seed(args.seed)?;
    let style = style_config(&mut cfg)?;
    let dataset = build(&mut cfg, seed, &style)?;
    let defaults = TrainOptions::default();
    let options = TrainOptions {
        epochs: cfg.take_usize("epochs", defaults.epochs)?,
        batch_size: cfg.take_usize("batch_size", defaults.batch_size)?,
        learning_rate: cfg.take_f32("learning_rate", defaults.learning_rate)?,
        lr_decay: cfg.take_f32("lr_decay", defaults.lr_decay)?,
    };
    let export_tiles = cfg.take_bool("export_tiles", false)?;
    cfg.finish()?;

    super::ensure_out_dir(&args.out)?;
    if export_tiles {
        export_dataset(&dataset, &args.out)?;
    }
    println!(
        "train-digits: {} train tiles, {} test tiles",
        dataset.train.len(),
        dataset.test.len()
    );
    let (net, losses) = train_classifier(&dataset.train, &options, seed);
    let train_eval = evaluate_classifier(&net, &dataset.train);
    let test_eval = evaluate_classifier(&net, &dataset.test);

    nn::save(&net, &super::out_path(&args.out, "digits.nnv1"))?;
    super::write_file(&super::out_path(&args.out, "training.csv"), |w| {
        super::schema_header(w, "digit-training")?;
        writeln!(w, "epoch,mean_cross_entropy")?;
        for (epoch, loss) in losses.iter().enumerate() {
            writeln!(w, "{},{:.6}", epoch + 1, loss)?;
        }
        Ok(())
    })?;
    super::write_file(&super::out_path(&args.out, "accuracy.csv"), |w| {
        super::schema_header(w, "digit-accuracy")?;
        write_accuracy(w, &[("train", &train_eval), ("test", &test_eval)])
    })?;
    super::write_file(&super::out_path(&args.out, "confusion.csv"), |w| {
        super::schema_header(w, "digit-confusion")?;
        write_confusion(w, &test_eval)
    })?;
    write_manifest(&args.out, "train-digits", cfg.echo())?;
    println!(
        "train-digits: train accuracy {:.4}%, held-out accuracy {:.4}% over {} tiles",
        train_eval.accuracy() * 100.0,
        test_eval.accuracy() * 100.0,
        test_eval.total
    );
    Ok(())
}

pub fn run_eval(args: &RunArgs) -> Result<()> {
    let mut cfg = Config::load(args.config.as_deref())?;
    let seed = cfg.seed(args.seed)?;
    let checkpoint = cfg.take_required("checkpoint")?;
    let style = style_config(&mut cfg)?;
    let dataset = build(&mut cfg, seed, &style)?;
    cfg.finish()?;

    super::ensure_out_dir(&args.out)?;
    let net = load_digit_net(Path::new(&checkpoint))?;
    let test_eval = evaluate_classifier(&net, &dataset.test);
    super::write_file(&super::out_path(&args.out, "accuracy.csv"), |w| {
        super::schema_header(w, "digit-accuracy")?;
        write_accuracy(w, &[("test", &test_eval)])
    })?;
    super::write_file(&super::out_path(&args.out, "confusion.csv"), |w| {
        super::schema_header(w, "digit-confusion")?;
        write_confusion(w, &test_eval)
    })?;
    write_manifest(&args.out, "eval-digits", cfg.echo())?;
    println!(
        "eval-digits: held-out accuracy {:.4}% over {} tiles",
        test_eval.accuracy() * 100.0,
        test_eval.total
    );
    Ok(())
}
