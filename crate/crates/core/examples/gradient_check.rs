//! Compare the analytic masked-loss gradient with central differences.
//!
//! `cargo run --example gradient_check`

use ndarray::array;
use readervar::net::{init_network, masked_loss, NetworkArch};

fn main() -> readervar::Result<()> {
    let mut net = init_network(&NetworkArch::new(3, vec![4, 3], 2), 11)?;
    let x = array![[0.5, -1.0, 2.0], [1.5, 0.2, -0.3], [-0.7, 0.9, 0.1]];
    let d = array![[40.0, 0.0], [0.0, 55.0], [30.0, 35.0]];
    // reader 2 never saw image 1, reader 1 never saw image 2
    let phi = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];

    let (loss, grad) = net.loss_gradient(x.view(), d.view(), phi.view())?;
    let analytic = grad.to_flat();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..net.num_params() {
        let p = net.param(i);
        net.set_param(i, p + h);
        let up = masked_loss(net.forward(x.view())?.outputs.view(), d.view(), phi.view())?;
        net.set_param(i, p - h);
        let down = masked_loss(net.forward(x.view())?.outputs.view(), d.view(), phi.view())?;
        net.set_param(i, p);
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - analytic[i]).abs() / analytic[i].abs().max(1.0));
    }
    println!("loss {loss:.3}, {} parameters, worst relative gradient error {worst:.2e}", net.num_params());
    assert!(worst < 1e-6);
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
