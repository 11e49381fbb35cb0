#![allow(dead_code)]

use std::sync::Arc;
use std::thread::JoinHandle;

use crashnet::solver::{handle_sample_request, simulated_annealing, AnnealSchedule, SampleRequest, SAMPLE_PATH};

pub const SERVER_SWEEPS: usize = 200;

/// Local HTTP sampler backed by simulated annealing with a fixed seed.
pub struct Loopback {
    pub url: String,
    server: Arc<tiny_http::Server>,
    handle: Option<JoinHandle<()>>,
}

impl Drop for Loopback {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

/// With `corrupt`, the first returned energy is off by one.
pub fn spawn_loopback(seed: u64, corrupt: bool) -> Loopback {
    let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").expect("bind loopback"));
    let port = server.server_addr().to_ip().expect("ip listener").port();
    let s = Arc::clone(&server);
    // A private pool keeps the server independent of client threads that
    // block on their requests.
    let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build().expect("server pool");
    let handle = std::thread::spawn(move || {
        for mut req in s.incoming_requests() {
            if req.url() != SAMPLE_PATH {
                let _ = req.respond(tiny_http::Response::from_string("not found").with_status_code(404));
                continue;
            }
            let mut body = String::new();
            let _ = req.as_reader().read_to_string(&mut body);
            let answer = serde_json::from_str::<SampleRequest>(&body)
                .map_err(|e| e.to_string())
                .and_then(|r| {
                    pool.install(|| {
                        handle_sample_request(&r, |q, reads| {
                            simulated_annealing(q, &AnnealSchedule::for_qubo(q, SERVER_SWEEPS, reads), seed)
                        })
                    })
                    .map_err(|e| e.to_string())
                });
            let resp = match answer {
                Ok(mut a) => {
                    if corrupt {
                        a.energies[0] += 1.0;
                    }
                    tiny_http::Response::from_string(serde_json::to_string(&a).unwrap()).with_header(
                        "Content-Type: application/json".parse::<tiny_http::Header>().unwrap(),
                    )
                }
                Err(e) => tiny_http::Response::from_string(e).with_status_code(400),
            };
            let _ = req.respond(resp);
        }
    });
    Loopback {
        url: format!("http://127.0.0.1:{port}"),
        server,
        handle: Some(handle),
    }
}
