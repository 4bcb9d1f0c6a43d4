//! Observables, reusable views and a renderer that drives an imperative
//! widget toolkit.
//!
//! Application state lives in [`Observable`]s. The interface is described
//! by composing views ([`views::window`], [`views::hpanel`],
//! [`views::button`], [`views::text`], ...). [`Renderer::render`] turns a view
//! into live widgets on a [`Backend`], subscribes each widget to the
//! observables it displays and routes user input back to the actions the
//! application supplied.
//!
//! ```
//! use easel::backend::HeadlessBackend;
//! use easel::views::{button, hpanel, text, window, WindowSpec};
//! use easel::{Observable, Renderer};
//!
//! let count = Observable::new(0_i64);
//! let app = window(WindowSpec::new("Counter").child(hpanel([
//!     button("-", { let c = count.clone(); move || c.update(|n| n - 1) }),
//!     text(count.map(|n| n.to_string())),
//!     button("+", { let c = count.clone(); move || c.update(|n| n + 1) }),
//! ])));
//!
//! let backend = HeadlessBackend::new();
//! let renderer = Renderer::new(backend.clone());
//! let root = renderer.render(&app).unwrap();
//! count.update(|n| n + 1).unwrap();
//! renderer.run_until_idle();
//! assert!(backend.dump_log().contains(r#"SetLabel #4 "1""#));
//! root.teardown();
//! ```

pub mod backend;
mod error;
pub mod obs;
mod render;
pub mod view;
pub mod views;

pub use backend::{Backend, WidgetHandle};
pub use error::Error;
pub use obs::{AnyObservable, ObsError, Observable, Subscription, Value};
pub use render::{BuildCx, Dispatcher, ErrorHook, RenderRoot, Renderer, WindowControls};
pub use view::{lift_widget, make_view, Action, AnyView, Prop, View, WidgetSpec};
