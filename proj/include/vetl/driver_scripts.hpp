#pragma once

// JavaScript executed through WebDriver's execute/sync. Each script starts
// with a `/*vetl:<name>*/` tag; the built-in headless browser dispatches on
// that tag instead of evaluating JavaScript.

namespace vetl::driver::scripts {

inline constexpr const char* kSnapshotTag = "/*vetl:snapshot*/";
inline constexpr const char* kPageTag = "/*vetl:page*/";
inline constexpr const char* kScrollTag = "/*vetl:scroll*/";
inline constexpr const char* kDrainTag = "/*vetl:drain*/";
inline constexpr const char* kViewportTag = "/*vetl:viewport*/";

// arguments[0]: stamp prefix for data-vetl-node.
inline constexpr const char* kSnapshot = R"JS(/*vetl:snapshot*/
const stamp = arguments[0];
if (!window.__vetlPage) {
  window.__vetlPage = String(Date.now()) + '-' + String(Math.random()).slice(2);
}
if (!window.__vetlHooked) {
  window.__vetlHooked = true;
  window.__vetlConsole = window.__vetlConsole || [];
  const original = console.error;
  console.error = function (...args) {
    window.__vetlConsole.push({t: Date.now(), m: args.map(String).join(' '), s: location.href});
    return original.apply(console, args);
  };
  window.addEventListener('error', (e) => {
    window.__vetlConsole.push({t: Date.now(), m: String(e.message), s: e.filename || location.href});
  });
}
const root = document.documentElement;
const nodes = root ? [root, ...root.querySelectorAll('*')] : [];
const elements = [];
nodes.forEach((el, i) => {
  const id = stamp + '-' + i;
  el.setAttribute('data-vetl-node', id);
  const r = el.getBoundingClientRect();
  const cs = window.getComputedStyle(el);
  const displayed = cs.display !== 'none' && cs.visibility !== 'hidden' && el.getClientRects().length > 0;
  const entry = {id: id, x: r.left + window.scrollX, y: r.top + window.scrollY, w: r.width, h: r.height,
                 displayed: displayed, enabled: !el.disabled};
  if (el.tagName === 'INPUT' || el.tagName === 'TEXTAREA') entry.value = el.value;
  elements.push(entry);
});
return {url: location.href, title: document.title, token: window.__vetlPage,
        html: root ? root.outerHTML : '', dpr: window.devicePixelRatio,
        sx: window.scrollX, sy: window.scrollY, vw: window.innerWidth, vh: window.innerHeight,
        elements: elements};
)JS";

inline constexpr const char* kPage = R"JS(/*vetl:page*/
return {url: location.href, token: window.__vetlPage || '', ready: document.readyState};
)JS";

// arguments[0]: data-vetl-node value.
inline constexpr const char* kScroll = R"JS(/*vetl:scroll*/
const el = document.querySelector('[data-vetl-node="' + arguments[0] + '"]');
if (!el) return false;
el.scrollIntoView({block: 'center', inline: 'nearest'});
return true;
)JS";

inline constexpr const char* kDrain = R"JS(/*vetl:drain*/
const entries = window.__vetlConsole || [];
window.__vetlConsole = [];
return entries;
)JS";

inline constexpr const char* kViewport = R"JS(/*vetl:viewport*/
return {vw: window.innerWidth, vh: window.innerHeight, dpr: window.devicePixelRatio};
)JS";

}  // namespace vetl::driver::scripts
