//! Serves the sampling endpoint locally and solves through it.

use std::time::Duration;

use crashnet::solver::{
    handle_sample_request, remote_sample, simulated_annealing, tabu_solve, AnnealSchedule, Qubo, RemoteSampler,
    SampleRequest, TabuParams,
};

fn main() -> crashnet::Result<()> {
    let server = tiny_http::Server::http("127.0.0.1:0").expect("bind");
    let port = server.server_addr().to_ip().expect("ip listener").port();
    std::thread::spawn(move || {
        for mut req in server.incoming_requests() {
            let mut body = String::new();
            let _ = req.as_reader().read_to_string(&mut body);
            let reply = serde_json::from_str::<SampleRequest>(&body)
                .map_err(|e| e.to_string())
                .and_then(|r| {
                    handle_sample_request(&r, |q, reads| {
                        simulated_annealing(q, &AnnealSchedule::for_qubo(q, 500, reads), 3)
                    })
                    .map_err(|e| e.to_string())
                });
            let resp = match reply {
                Ok(a) => tiny_http::Response::from_string(serde_json::to_string(&a).unwrap()),
                Err(e) => tiny_http::Response::from_string(e).with_status_code(400),
            };
            let _ = req.respond(resp);
        }
    });

    let mut q = Qubo::new(4);
    q.linear = vec![-1.0, 2.0, -1.0, 0.5];
    q.add(0, 1, -1.5);
    q.add(2, 3, -2.0);
    q.offset = 10.0;
    let sampler = RemoteSampler::new(format!("http://127.0.0.1:{port}"), Duration::from_secs(10), 1);
    let remote = remote_sample(&sampler, &q, 5)?;
    let local = tabu_solve(&q, &TabuParams::for_size(4), 0)?;
    println!("remote best {:.3} {:?}", remote.best_energy(), remote.best_sample().assignment);
    println!("local  best {:.3} {:?}", local.best_energy(), local.best_sample().assignment);
    Ok(())
}
