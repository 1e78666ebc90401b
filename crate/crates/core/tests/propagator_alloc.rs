//! The propagator hot path must not allocate.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use qedsim::composite::make_binary;
use qedsim::elements::{coherent, make_mode, make_qbit, state1, JaynesCummings, ParsMode, ParsQbit, Picture};
use qedsim::qop::{DiagonalPropagator, Direction};

struct Counting;

static ALLOCATIONS: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        ALLOCATIONS.fetch_add(1, Ordering::SeqCst);
        unsafe { System.alloc(layout) }
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) }
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        ALLOCATIONS.fetch_add(1, Ordering::SeqCst);
        unsafe { System.realloc(ptr, layout, new_size) }
    }
}

#[global_allocator]
static GLOBAL: Counting = Counting;

fn allocations_during(f: impl FnOnce()) -> usize {
    let before = ALLOCATIONS.load(Ordering::SeqCst);
    f();
    ALLOCATIONS.load(Ordering::SeqCst) - before
}

#[test]
fn propagator_application_does_not_allocate() {
    let pq = ParsQbit { delta: 0.3, gamma: 0.2, ..Default::default() };
    let pm = ParsMode { delta: -0.7, kappa: 0.1, cutoff: 8, ..Default::default() };
    let q = Arc::new(make_qbit(&pq, Picture::IP).unwrap());
    let m = Arc::new(make_mode(&pm, Picture::IP).unwrap());
    let sys = make_binary(Arc::new(JaynesCummings::new(q, m, C64::new(1.0, 0.0)).unwrap())).unwrap();
    let mut psi = state1().direct_product(&coherent(C64::new(1.0, 0.5), 8).unwrap()).unwrap();
    let mut rho = psi.dyad();
    let single = DiagonalPropagator::new(1, (0..8).map(|n| C64::new(-0.1, 0.4) * n as f64).collect());

    // warm up lazily initialized state outside the measured region
    sys.apply_propagators(0.1, &mut psi, Direction::Forward).unwrap();

    let n = allocations_during(|| {
        for k in 0..50 {
            let t = 0.01 * k as f64;
            sys.apply_propagators(t, &mut psi, Direction::Forward).unwrap();
            sys.apply_propagators(t, &mut psi, Direction::Backward).unwrap();
            single.apply(t, &mut psi, Direction::Forward).unwrap();
        }
    });
    assert_eq!(n, 0, "state-vector propagation allocated {n} times");

    let n = allocations_during(|| {
        for k in 0..50 {
            sys.apply_propagators_density(0.02 * k as f64, &mut rho, Direction::Forward).unwrap();
        }
    });
    assert_eq!(n, 0, "density-operator propagation allocated {n} times");
}
