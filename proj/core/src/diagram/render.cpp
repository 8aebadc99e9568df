#include "vplan/diagram/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace vp::diagram {

namespace {

// Advance widths of printable ASCII (32-126) in 1/2048 em, DejaVu Sans.
constexpr int kAdvance[95] = {
    651,  821,  942,  1716, 1303, 1946, 1597, 563,  799,  799,  1024, 1716, 651,  739,  651,  690,
    1303, 1303, 1303, 1303, 1303, 1303, 1303, 1303, 1303, 1303, 690,  690,  1716, 1716, 1716, 1087,
    2048, 1401, 1405, 1430, 1577, 1294, 1178, 1587, 1540, 604,  604,  1343, 1141, 1767, 1532, 1612,
    1235, 1612, 1423, 1300, 1251, 1499, 1401, 2025, 1403, 1251, 1403, 799,  690,  799,  1716, 1024,
    1024, 1255, 1300, 1126, 1300, 1260, 721,  1300, 1298, 569,  569,  1186, 569,  1995, 1298, 1253,
    1300, 1300, 842,  1067, 803,  1298, 1212, 1675, 1212, 1212, 1075, 1303, 690,  1303, 1716,
};

constexpr double kLabelPx = 14.0;
constexpr double kStatusPx = 10.0;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", std::fabs(v) < 0.0005 ? 0.0 : v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

bool dark(std::string_view color) {
  static constexpr std::string_view kDark[] = {"black", "brown", "purple", "blue", "teal", "green", "red"};
  return std::find(std::begin(kDark), std::end(kDark), color) != std::end(kDark);
}

std::string fill_of(const ObjectSpec& o) {
  auto hex = color_hex(o.color);
  return hex ? std::string(*hex) : "#9e9e9e";
}

void text_element(std::string& out, std::string_view text, double cx, double baseline, double size, std::string_view fill,
                  bool italic) {
  out += "<text x=\"" + num(cx) + "\" y=\"" + num(baseline) + "\" font-size=\"" + num(size) +
         "\" text-anchor=\"middle\" fill=\"" + std::string(fill) + "\"";
  if (italic) out += " font-style=\"italic\"";
  out += ">" + escape(text) + "</text>\n";
}

}  // namespace

double text_width_em(std::string_view text) {
  double units = 0;
  for (unsigned char c : text) {
    if (c >= 32 && c < 127) units += kAdvance[c - 32];
    else if ((c & 0xC0) != 0x80) units += 1229;  // non-ASCII lead byte
  }
  return units / 2048.0;
}

RenderedDiagram render(const DiagramSchema& schema) {
  RenderedDiagram out;
  out.boxes = layout(schema);
  const double s = kPixelsPerUnit;
  const double W = schema.width * s, H = schema.height * s;
  std::string& svg = out.svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(W) + "\" height=\"" + num(H) +
         "\" viewBox=\"0 0 " + num(W) + " " + num(H) + "\">\n";
  if (!schema.title.empty()) svg += "<title>" + escape(schema.title) + "</title>\n";
  svg += "<rect x=\"0.000\" y=\"0.000\" width=\"" + num(W) + "\" height=\"" + num(H) + "\" fill=\"#ffffff\"/>\n";
  svg += "<g id=\"objects\" font-family=\"DejaVu Sans, Verdana, sans-serif\">\n";
  std::vector<std::string> drawn;
  for (const auto& o : schema.objects) {
    if (std::find(drawn.begin(), drawn.end(), o.id) != drawn.end()) continue;
    drawn.push_back(o.id);
    const Box& b = out.boxes.at(o.id);
    const double x = b.x * s, w = b.w * s, h = b.h * s;
    const double y = H - (b.y + b.h) * s;
    const double cx = x + w / 2, cy = y + h / 2;
    const std::string fill = fill_of(o);
    svg += "<g id=\"obj-" + escape(o.id) + "\">\n";
    const std::string stroke = " stroke=\"#333333\" stroke-width=\"1.000\"";
    switch (o.shape) {
      case Shape::square:
      case Shape::rectangle:
        svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
               "\" fill=\"" + fill + "\"" + stroke + "/>\n";
        break;
      case Shape::circle:
        svg += "<ellipse cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" rx=\"" + num(w / 2) + "\" ry=\"" + num(h / 2) +
               "\" fill=\"" + fill + "\"" + stroke + "/>\n";
        break;
      case Shape::triangle:
        svg += "<polygon points=\"" + num(cx) + "," + num(y) + " " + num(x + w) + "," + num(y + h) + " " + num(x) +
               "," + num(y + h) + "\" fill=\"" + fill + "\"" + stroke + "/>\n";
        break;
      case Shape::line:
        svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(cy) + "\" x2=\"" + num(x + w) + "\" y2=\"" + num(cy) +
               "\" stroke=\"" + fill + "\" stroke-width=\"" + num(std::max(h, 1.0)) + "\"/>\n";
        break;
      case Shape::label_only:
        break;
    }
    if (!o.label.empty()) {
      double size = kLabelPx;
      double em = text_width_em(o.label);
      if (w > 0 && em > 0) size = std::min(size, 0.9 * w / em);
      if (o.shape != Shape::label_only && o.shape != Shape::line && h > 0) size = std::min(size, 0.8 * h);
      double baseline = o.shape == Shape::line ? y - 3 : cy + 0.35 * size;
      bool light_text = o.shape != Shape::label_only && o.shape != Shape::line && dark(o.color);
      text_element(svg, o.label, o.shape == Shape::line ? x + em * size / 2 : cx, baseline, size,
                   light_text ? "#ffffff" : "#000000", false);
    }
    if (!o.status.empty()) text_element(svg, o.status, cx, y - 3, kStatusPx, "#333333", true);
    svg += "</g>\n";
  }
  svg += "</g>\n</svg>\n";
  return out;
}

std::string matplotlib_code(const DiagramSchema& schema) {
  auto boxes = layout(schema);
  auto quoted = [](std::string_view s) {
    std::string out = "'";
    for (char c : s) {
      if (c == '\\' || c == '\'') out += '\\';
      out += c;
    }
    return out + "'";
  };
  std::string py =
      "import matplotlib\n"
      "matplotlib.use('Agg')\n"
      "import matplotlib.pyplot as plt\n"
      "from matplotlib import patches\n\n";
  py += "fig, ax = plt.subplots(figsize=(" + format_number(schema.width) + ", " + format_number(schema.height) + "))\n";
  py += "ax.set_xlim(0, " + format_number(schema.width) + ")\nax.set_ylim(0, " + format_number(schema.height) + ")\n";
  py += "ax.set_aspect('equal')\nax.axis('off')\n";
  if (!schema.title.empty()) py += "ax.set_title(" + quoted(schema.title) + ")\n";
  for (const auto& o : schema.objects) {
    const Box& b = boxes.at(o.id);
    std::string fill = quoted(fill_of(o));
    std::string x = format_number(b.x), y = format_number(b.y), w = format_number(b.w), h = format_number(b.h);
    std::string cx = format_number(b.x + b.w / 2), cy = format_number(b.y + b.h / 2);
    switch (o.shape) {
      case Shape::square:
      case Shape::rectangle:
        py += "ax.add_patch(patches.Rectangle((" + x + ", " + y + "), " + w + ", " + h + ", facecolor=" + fill +
              ", edgecolor='#333333'))\n";
        break;
      case Shape::circle:
        py += "ax.add_patch(patches.Ellipse((" + cx + ", " + cy + "), " + w + ", " + h + ", facecolor=" + fill +
              ", edgecolor='#333333'))\n";
        break;
      case Shape::triangle:
        py += "ax.add_patch(patches.Polygon([(" + x + ", " + y + "), (" + format_number(b.x + b.w) + ", " + y +
              "), (" + cx + ", " + format_number(b.y + b.h) + ")], facecolor=" + fill + ", edgecolor='#333333'))\n";
        break;
      case Shape::line:
        py += "ax.plot([" + x + ", " + format_number(b.x + b.w) + "], [" + cy + ", " + cy + "], color=" + fill + ")\n";
        break;
      case Shape::label_only:
        break;
    }
    if (!o.label.empty()) py += "ax.text(" + cx + ", " + cy + ", " + quoted(o.label) + ", ha='center', va='center')\n";
    if (!o.status.empty()) {
      py += "ax.text(" + cx + ", " + format_number(b.y + b.h + 0.1) + ", " + quoted(o.status) +
            ", ha='center', va='bottom', fontsize=8, style='italic')\n";
    }
  }
  py += "fig.savefig('diagram.png', dpi=80)\n";
  return py;
}

std::string layout_table(const std::map<std::string, Box>& boxes) {
  std::string out;
  for (const auto& [id, b] : boxes) {
    out += id + " " + format_number(b.x) + " " + format_number(b.y) + " " + format_number(b.w) + " " +
           format_number(b.h) + "\n";
  }
  return out;
}

}  // namespace vp::diagram
