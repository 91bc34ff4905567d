//! Linear versus cubic decision boundaries on an XOR layout.

use blindprint::classify::{train, ClassifierKind, Hyperparams, KernelSpec, LabeledData};
use blindprint::dataset::Label;

fn main() -> blindprint::Result<()> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..200 {
        let (a, b) = ((i % 20) as f64 / 19.0 - 0.5, (i / 20) as f64 / 9.0 - 0.5);
        if a.abs() < 0.05 || b.abs() < 0.05 {
            continue;
        }
        rows.push(vec![a, b]);
        labels.push(if a * b > 0.0 { Label::Bad } else { Label::Good });
    }
    let data = LabeledData::from_rows(&rows, labels)?;
    let accuracy = |kind, hyper: &Hyperparams| -> blindprint::Result<f64> {
        let model = train(kind, &data, hyper)?;
        let hits = (0..data.len()).filter(|&i| matches!(model.predict(data.row(i)), Ok((l, _)) if l == data.labels[i]));
        Ok(100.0 * hits.count() as f64 / data.len() as f64)
    };
    let lr = accuracy(ClassifierKind::Lr, &Hyperparams::Logistic { lambda: 1e-4 })?;
    let svm = accuracy(ClassifierKind::CubicSvm, &Hyperparams::Svm { c: 10.0, kernel: KernelSpec::cubic(1.0) })?;
    println!("{} points: logistic {lr:.1}%, cubic SVM {svm:.1}%", data.len());
    Ok(())
}
