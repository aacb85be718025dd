/* kinesim fallback viewer: canvas 2D, no dependencies. */
(function () {
  "use strict";

  var VERSION = "kinesim-doc/1";
  var root = document.getElementById("kinesim-root") || document.body;
  var dataEl = document.getElementById("kinesim-doc");

  var doc = null;
  var livePoses = null;
  var liveConfigs = null;
  var socket = null;
  var t = 0;
  var playing = true;
  var lastTick = null;

  // ---- math (row-major 4x4 as flat arrays of 16)

  function mul(a, b) {
    var o = new Array(16);
    for (var r = 0; r < 4; r++) {
      for (var c = 0; c < 4; c++) {
        var s = 0;
        for (var k = 0; k < 4; k++) s += a[r * 4 + k] * b[k * 4 + c];
        o[r * 4 + c] = s;
      }
    }
    return o;
  }

  function apply(m, p) {
    return [
      m[0] * p[0] + m[1] * p[1] + m[2] * p[2] + m[3],
      m[4] * p[0] + m[5] * p[1] + m[6] * p[2] + m[7],
      m[8] * p[0] + m[9] * p[1] + m[10] * p[2] + m[11]
    ];
  }

  function dh(link, q) {
    var th = link.theta, d = link.d;
    if (link.joint === "revolute") th += q; else d += q;
    var ct = Math.cos(th), st = Math.sin(th), ca = Math.cos(link.alpha), sa = Math.sin(link.alpha);
    return [ct, -st * ca, st * sa, link.a * ct,
            st, ct * ca, -ct * sa, link.a * st,
            0, sa, ca, d,
            0, 0, 0, 1];
  }

  function sub(a, b) { return [a[0] - b[0], a[1] - b[1], a[2] - b[2]]; }
  function dot(a, b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
  function cross(a, b) { return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]; }
  function norm(a) { var n = Math.sqrt(dot(a, a)) || 1; return [a[0] / n, a[1] / n, a[2] / n]; }

  // ---- playback (sample-and-hold, identical to the library rule)

  function held(keys, time) {
    var lo = 0, hi = keys.length;
    while (lo < hi) {
      var mid = (lo + hi) >> 1;
      if (keys[mid].t <= time) lo = mid + 1; else hi = mid;
    }
    return lo === 0 ? null : keys[lo - 1];
  }

  function trackOf(id) {
    if (!doc) return null;
    for (var i = 0; i < doc.tracks.length; i++) if (doc.tracks[i].id === id) return doc.tracks[i];
    return null;
  }

  function objectPose(obj, time) {
    if (livePoses && livePoses[obj.id]) return livePoses[obj.id];
    var tr = trackOf(obj.id);
    var k = tr ? held(tr.keys, time) : null;
    return k ? k.pose : obj.pose;
  }

  function robotQ(robot, time) {
    if (liveConfigs && liveConfigs[robot.id]) return liveConfigs[robot.id];
    var tr = trackOf(robot.id);
    var k = tr ? held(tr.keys, time) : null;
    return k ? k.q : robot.model.q;
  }

  function robotFrames(model, q) {
    var frames = [model.base];
    var h = model.base;
    for (var i = 0; i < model.links.length; i++) {
      h = mul(h, dh(model.links[i], q[i]));
      frames.push(h);
    }
    frames.push(mul(h, model.tool));
    return frames;
  }

  // ---- view

  var canvas = document.createElement("canvas");
  canvas.style.width = "100%";
  canvas.style.height = "calc(100% - 40px)";
  canvas.style.display = "block";
  root.appendChild(canvas);
  var ctx = canvas.getContext("2d");

  var bar = document.createElement("div");
  bar.style.cssText = "height:40px;display:flex;align-items:center;gap:8px;padding:0 8px;border-top:1px solid #ccc";
  var playBtn = document.createElement("button");
  var slider = document.createElement("input");
  slider.type = "range";
  slider.min = "0";
  slider.step = "any";
  slider.style.flex = "1";
  var label = document.createElement("span");
  label.style.cssText = "min-width:120px;font-family:monospace";
  var status = document.createElement("span");
  bar.appendChild(playBtn);
  bar.appendChild(slider);
  bar.appendChild(label);
  bar.appendChild(status);
  root.appendChild(bar);

  var banner = null;
  function showBanner(msg) {
    if (!banner) {
      banner = document.createElement("div");
      banner.style.cssText = "position:absolute;top:0;left:0;right:0;padding:8px;background:#c33;color:#fff";
      root.appendChild(banner);
    }
    banner.textContent = msg;
  }

  var orbit = { yaw: 0, pitch: 0, scale: 1 };
  var dragging = null;
  canvas.addEventListener("mousedown", function (e) { dragging = [e.clientX, e.clientY]; });
  window.addEventListener("mouseup", function () { dragging = null; });
  window.addEventListener("mousemove", function (e) {
    if (!dragging) return;
    orbit.yaw -= (e.clientX - dragging[0]) * 0.01;
    orbit.pitch = Math.max(-1.4, Math.min(1.4, orbit.pitch + (e.clientY - dragging[1]) * 0.01));
    dragging = [e.clientX, e.clientY];
  });
  canvas.addEventListener("wheel", function (e) {
    e.preventDefault();
    orbit.scale *= e.deltaY > 0 ? 1.1 : 1 / 1.1;
  }, { passive: false });

  function cameraBasis() {
    var cam = doc.camera;
    var off = sub(cam.position, cam.look_at);
    var up = norm(cam.up);
    // Orbit: yaw about up, pitch about the camera's right axis.
    var cy = Math.cos(orbit.yaw), sy = Math.sin(orbit.yaw);
    var k = cross(up, off);
    var along = dot(up, off);
    off = [off[0] * cy + k[0] * sy + up[0] * along * (1 - cy),
           off[1] * cy + k[1] * sy + up[1] * along * (1 - cy),
           off[2] * cy + k[2] * sy + up[2] * along * (1 - cy)];
    var right = norm(cross(off, up));
    var cp = Math.cos(orbit.pitch), sp = Math.sin(orbit.pitch);
    var k2 = cross(right, off);
    off = [off[0] * cp + k2[0] * sp, off[1] * cp + k2[1] * sp, off[2] * cp + k2[2] * sp];
    off = [off[0] * orbit.scale, off[1] * orbit.scale, off[2] * orbit.scale];
    var eye = [cam.look_at[0] + off[0], cam.look_at[1] + off[1], cam.look_at[2] + off[2]];
    var fwd = norm(sub(cam.look_at, eye));
    var r = norm(cross(fwd, up));
    var u = cross(r, fwd);
    return { eye: eye, f: fwd, r: r, u: u, fov: cam.fov_deg * Math.PI / 180 };
  }

  function projector() {
    var b = cameraBasis();
    var w = canvas.width, h = canvas.height;
    var focal = (h / 2) / Math.tan(b.fov / 2);
    return function (p) {
      var d = sub(p, b.eye);
      var z = dot(d, b.f);
      if (z < 1e-3) return null;
      return [w / 2 + focal * dot(d, b.r) / z, h / 2 - focal * dot(d, b.u) / z, focal / z];
    };
  }

  function rgb(c, a) { return "rgba(" + c[0] + "," + c[1] + "," + c[2] + "," + (a === undefined ? 1 : a) + ")"; }

  function line(P, a, b, style) {
    var pa = P(a), pb = P(b);
    if (!pa || !pb) return;
    ctx.strokeStyle = style;
    ctx.beginPath();
    ctx.moveTo(pa[0], pa[1]);
    ctx.lineTo(pb[0], pb[1]);
    ctx.stroke();
  }

  function ring(P, m, r, z, n) {
    var pts = [];
    for (var i = 0; i <= n; i++) {
      var a = 2 * Math.PI * i / n;
      pts.push(apply(m, [r * Math.cos(a), r * Math.sin(a), z]));
    }
    return pts;
  }

  function polyline(P, pts, style) {
    for (var i = 1; i < pts.length; i++) line(P, pts[i - 1], pts[i], style);
  }

  function drawShape(P, shape, m, mat) {
    var style = rgb(mat.color, Math.max(0.25, mat.opacity));
    switch (shape.type) {
      case "box": {
        var x = shape.width / 2, y = shape.height / 2, z = shape.depth / 2;
        var c = [];
        for (var i = 0; i < 8; i++) c.push(apply(m, [i & 1 ? x : -x, i & 2 ? y : -y, i & 4 ? z : -z]));
        var edges = [[0, 1], [2, 3], [4, 5], [6, 7], [0, 2], [1, 3], [4, 6], [5, 7], [0, 4], [1, 5], [2, 6], [3, 7]];
        for (var e = 0; e < edges.length; e++) line(P, c[edges[e][0]], c[edges[e][1]], style);
        break;
      }
      case "ball": {
        var p = P(apply(m, [0, 0, 0]));
        if (!p) break;
        ctx.fillStyle = style;
        ctx.beginPath();
        ctx.arc(p[0], p[1], Math.max(1, shape.radius * p[2]), 0, 2 * Math.PI);
        ctx.fill();
        break;
      }
      case "cylinder":
      case "cone": {
        var hz = shape.height / 2;
        var bottom = ring(P, m, shape.radius, -hz, 16);
        polyline(P, bottom, style);
        if (shape.type === "cylinder") {
          var top = ring(P, m, shape.radius, hz, 16);
          polyline(P, top, style);
          for (var s = 0; s < 16; s += 4) line(P, bottom[s], top[s], style);
        } else {
          var tip = apply(m, [0, 0, hz]);
          for (var s2 = 0; s2 < 16; s2 += 4) line(P, bottom[s2], tip, style);
        }
        break;
      }
      case "frame": {
        var o = apply(m, [0, 0, 0]), L = shape.axis_length;
        line(P, o, apply(m, [L, 0, 0]), "#d22");
        line(P, o, apply(m, [0, L, 0]), "#2a2");
        line(P, o, apply(m, [0, 0, L]), "#22d");
        break;
      }
      case "point_cloud": {
        ctx.fillStyle = style;
        for (var k = 0; k < shape.points.length; k++) {
          var q = P(apply(m, shape.points[k]));
          if (q) ctx.fillRect(q[0] - 1, q[1] - 1, 2, 2);
        }
        break;
      }
      case "group": {
        for (var g = 0; g < shape.children.length; g++) {
          var child = shape.children[g];
          drawShape(P, child.shape, mul(m, child.pose), child.material);
        }
        break;
      }
    }
  }

  function draw() {
    var w = canvas.clientWidth, h = canvas.clientHeight;
    if (canvas.width !== w || canvas.height !== h) { canvas.width = w; canvas.height = h; }
    ctx.fillStyle = doc ? rgb(doc.background) : "#fff";
    ctx.fillRect(0, 0, w, h);
    if (!doc) return;
    var P = projector();
    ctx.lineWidth = 1;
    if (doc.grid_visible) {
      for (var i = -5; i <= 5; i++) {
        line(P, [i, -5, 0], [i, 5, 0], "#ddd");
        line(P, [-5, i, 0], [5, i, 0], "#ddd");
      }
    }
    ctx.lineWidth = 2;
    for (var o = 0; o < doc.objects.length; o++) {
      var obj = doc.objects[o];
      drawShape(P, obj.shape, objectPose(obj, t), obj.material);
    }
    for (var r = 0; r < doc.robots.length; r++) {
      var robot = doc.robots[r];
      var frames = robotFrames(robot.model, robotQ(robot, t));
      var style = rgb(robot.material.color);
      ctx.lineWidth = 4;
      for (var f = 1; f < frames.length; f++) {
        line(P, [frames[f - 1][3], frames[f - 1][7], frames[f - 1][11]], [frames[f][3], frames[f][7], frames[f][11]], style);
      }
      ctx.lineWidth = 2;
      for (var j = 0; j < frames.length; j++) {
        var p = P([frames[j][3], frames[j][7], frames[j][11]]);
        if (!p) continue;
        ctx.fillStyle = "#333";
        ctx.beginPath();
        ctx.arc(p[0], p[1], 4, 0, 2 * Math.PI);
        ctx.fill();
      }
    }
    label.textContent = "t = " + t.toFixed(2) + " / " + doc.duration.toFixed(2) + " s";
  }

  function frame(now) {
    if (lastTick !== null && playing && doc && !socket) {
      t += (now - lastTick) / 1000;
      if (t > doc.duration) t = doc.duration > 0 ? t % doc.duration : 0;
      slider.value = String(t);
    }
    lastTick = now;
    playBtn.textContent = playing ? "pause" : "play";
    draw();
    window.requestAnimationFrame(frame);
  }

  function load(d) {
    if (!d || d._version !== VERSION) {
      showBanner("unsupported document version: " + (d && d._version));
      doc = null;
      return;
    }
    doc = d;
    slider.max = String(doc.duration);
    if (t > doc.duration) t = 0;
  }

  // ---- live mode: only when served over http by the live server

  var nextId = 1;
  function send(msg) {
    if (!socket || socket.readyState !== 1) return;
    msg.request_id = "v" + (nextId++);
    socket.send(JSON.stringify(msg));
  }

  function connect() {
    var scheme = location.protocol === "https:" ? "wss:" : "ws:";
    socket = new WebSocket(scheme + "//" + location.host + "/ws");
    status.textContent = "connecting";
    socket.onopen = function () { status.textContent = "live"; };
    socket.onclose = function () { status.textContent = "disconnected"; socket = null; };
    socket.onmessage = function (ev) {
      var msg = JSON.parse(ev.data);
      if (msg.type === "hello") {
        load(msg.document);
      } else if (msg.type === "frame") {
        t = msg.t;
        playing = msg.playing;
        slider.value = String(t);
        livePoses = {};
        for (var i = 0; i < msg.poses.length; i++) livePoses[msg.poses[i].id] = msg.poses[i].pose;
        liveConfigs = {};
        for (var j = 0; j < msg.configs.length; j++) liveConfigs[msg.configs[j].id] = msg.configs[j].q;
      } else if (msg.type === "error") {
        status.textContent = "error: " + msg.message;
      }
    };
  }

  playBtn.onclick = function () {
    if (socket) send({ type: playing ? "pause" : "play" });
    else playing = !playing;
  };
  slider.oninput = function () {
    var v = parseFloat(slider.value);
    if (socket) send({ type: "seek", t: v });
    else t = v;
  };

  try {
    load(JSON.parse(dataEl ? dataEl.textContent : "null"));
  } catch (err) {
    showBanner("could not read the embedded document: " + err.message);
  }
  if (document.querySelector('meta[name="kinesim-live"]') && /^https?:$/.test(location.protocol)) connect();
  window.kinesimViewer = { send: send, state: function () { return { t: t, playing: playing, doc: doc }; } };
  window.requestAnimationFrame(frame);
})();
