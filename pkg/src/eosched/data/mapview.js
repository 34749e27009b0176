// Minimal pan/zoom map viewer for eosched GeoJSON output.
// Equirectangular projection on a canvas; no network access.
(function () {
  "use strict";
  var canvas = document.getElementById("map");
  var ctx = canvas.getContext("2d");
  var tip = document.getElementById("tip");
  var panel = document.getElementById("panel");
  var feats = EOS_DATA.features;
  var layers = { track: true, request: true, attempt: true, acquisition: true };
  var colors = { track: "#d4572a", request: "#3465a4", attempt: "#edd400", acquisition: "#4e9a06" };
  var view = { cx: 0, cy: 20, scale: 1 };
  var drag = null;

  function resize() {
    canvas.width = window.innerWidth;
    canvas.height = window.innerHeight;
    draw();
  }

  function px(lon, lat) {
    var k = view.scale * canvas.width / 360;
    return [canvas.width / 2 + (lon - view.cx) * k, canvas.height / 2 - (lat - view.cy) * k];
  }

  function unpx(x, y) {
    var k = view.scale * canvas.width / 360;
    return [view.cx + (x - canvas.width / 2) / k, view.cy - (y - canvas.height / 2) / k];
  }

  function drawBackground() {
    ctx.fillStyle = "#dfe8f0";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    for (var i = 0; i < EOS_BACKGROUND.length; i++) {
      var c = EOS_BACKGROUND[i];
      var a = px(c[1] - c[2], c[0] + c[2]);
      var b = px(c[1] + c[2], c[0] - c[2]);
      ctx.fillStyle = "rgba(120,110,90," + (0.15 + 0.6 * Math.sqrt(c[3])).toFixed(3) + ")";
      ctx.fillRect(a[0], a[1], b[0] - a[0] + 0.5, b[1] - a[1] + 0.5);
    }
    ctx.strokeStyle = "rgba(0,0,0,0.12)";
    ctx.lineWidth = 1;
    for (var lon = -180; lon <= 180; lon += 30) {
      var p = px(lon, 90), q = px(lon, -90);
      ctx.beginPath(); ctx.moveTo(p[0], p[1]); ctx.lineTo(q[0], q[1]); ctx.stroke();
    }
    for (var lat = -90; lat <= 90; lat += 30) {
      var r = px(-180, lat), s = px(180, lat);
      ctx.beginPath(); ctx.moveTo(r[0], r[1]); ctx.lineTo(s[0], s[1]); ctx.stroke();
    }
  }

  function drawPoint(f, radius) {
    var c = f.geometry.coordinates, p = px(c[0], c[1]);
    ctx.beginPath();
    ctx.arc(p[0], p[1], radius, 0, 2 * Math.PI);
    ctx.fill();
    ctx.stroke();
  }

  function draw() {
    drawBackground();
    var order = ["track", "request", "attempt", "acquisition"];
    var radius = { request: 3, attempt: 4, acquisition: 6 };
    for (var o = 0; o < order.length; o++) {
      var kind = order[o];
      if (!layers[kind]) continue;
      ctx.strokeStyle = kind === "track" ? colors.track : "#222";
      ctx.fillStyle = colors[kind];
      ctx.lineWidth = kind === "track" ? 1.5 : 0.5;
      for (var i = 0; i < feats.length; i++) {
        var f = feats[i];
        if (f.properties.kind !== kind) continue;
        if (kind === "track") {
          var parts = f.geometry.coordinates;
          for (var j = 0; j < parts.length; j++) {
            ctx.beginPath();
            for (var k = 0; k < parts[j].length; k++) {
              var p = px(parts[j][k][0], parts[j][k][1]);
              if (k === 0) ctx.moveTo(p[0], p[1]); else ctx.lineTo(p[0], p[1]);
            }
            ctx.stroke();
          }
        } else {
          drawPoint(f, radius[kind]);
        }
      }
    }
    if (EOS_STAMP) {
      ctx.fillStyle = "#444";
      ctx.fillText(EOS_STAMP, 8, canvas.height - 8);
    }
  }

  function buildPanel() {
    var counts = {};
    for (var i = 0; i < feats.length; i++) {
      var kind = feats[i].properties.kind;
      counts[kind] = (counts[kind] || 0) + 1;
    }
    Object.keys(layers).forEach(function (kind) {
      var label = document.createElement("label");
      var box = document.createElement("input");
      box.type = "checkbox";
      box.checked = true;
      box.onchange = function () { layers[kind] = box.checked; draw(); };
      label.appendChild(box);
      label.appendChild(document.createTextNode(" " + kind + " (" + (counts[kind] || 0) + ")"));
      label.style.display = "block";
      label.style.color = colors[kind];
      panel.appendChild(label);
    });
  }

  function describe(f) {
    var out = [];
    var props = f.properties;
    Object.keys(props).forEach(function (key) {
      if (props[key] !== null) out.push(key + ": " + props[key]);
    });
    return out.join("\n");
  }

  function nearest(x, y) {
    var best = null, bestD = 64;
    for (var i = feats.length - 1; i >= 0; i--) {
      var f = feats[i];
      if (f.geometry.type !== "Point" || !layers[f.properties.kind]) continue;
      var c = f.geometry.coordinates, p = px(c[0], c[1]);
      var d = (p[0] - x) * (p[0] - x) + (p[1] - y) * (p[1] - y);
      if (d < bestD) { bestD = d; best = f; }
    }
    return best;
  }

  canvas.addEventListener("mousedown", function (e) { drag = [e.clientX, e.clientY, view.cx, view.cy]; });
  window.addEventListener("mouseup", function () { drag = null; });
  canvas.addEventListener("mousemove", function (e) {
    if (drag) {
      var k = view.scale * canvas.width / 360;
      view.cx = drag[2] - (e.clientX - drag[0]) / k;
      view.cy = drag[3] + (e.clientY - drag[1]) / k;
      draw();
      return;
    }
    var f = nearest(e.clientX, e.clientY);
    if (f) {
      tip.textContent = describe(f);
      tip.style.left = e.clientX + 12 + "px";
      tip.style.top = e.clientY + 12 + "px";
      tip.style.display = "block";
    } else {
      tip.style.display = "none";
    }
  });
  canvas.addEventListener("wheel", function (e) {
    e.preventDefault();
    var before = unpx(e.clientX, e.clientY);
    view.scale = Math.min(64, Math.max(0.5, view.scale * (e.deltaY < 0 ? 1.25 : 0.8)));
    var after = unpx(e.clientX, e.clientY);
    view.cx += before[0] - after[0];
    view.cy += before[1] - after[1];
    draw();
  }, { passive: false });

  window.addEventListener("resize", resize);
  buildPanel();
  resize();
})();
