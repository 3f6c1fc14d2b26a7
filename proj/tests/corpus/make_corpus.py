#!/usr/bin/env python3
"""Builds the golden corpus: raw MinerU-style documents and gold annotations.

Gold labels come from how each document is constructed (which titles sit at
which depth, which blocks were split by a page or column break, which
caption belongs to which figure), never from running the pipeline.

    python3 tests/corpus/make_corpus.py            # rewrite docs/ and gold/
"""

import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent
PAGE_W, PAGE_H = 1000, 1400

FILLER = [
    "The committee reviewed the quarterly figures and approved the revised budget.",
    "Operating costs fell slightly while staffing levels remained stable.",
    "Each regional office submitted its plan before the agreed deadline.",
    "The audit found no material weaknesses in the control environment.",
    "Demand recovered in the second half after a slow start to the year.",
    "Maintenance windows were scheduled outside peak traffic hours.",
    "All measurements were repeated three times and averaged.",
    "The new process reduced manual handling by roughly a third.",
    "Feedback from field teams was collected through short interviews.",
    "Results are reported with the same rounding rules as last year.",
    "Supplier contracts were renegotiated to include service credits.",
    "The board will revisit the target once the pilot concludes.",
]

CN_FILLER = [
    "本办法适用于公司各部门及下属单位的日常管理工作。",
    "各单位应当建立健全内部控制制度并定期开展自查。",
    "相关数据应当真实准确完整并按时报送主管部门。",
    "年度计划经审议通过后由办公室统一组织实施。",
    "对违反本办法的行为应当及时予以纠正并追究责任。",
    "本条所称重大事项包括对外投资和资产处置等。",
]


def para(seed, n=2, cn=False):
    pool = CN_FILLER if cn else FILLER
    joiner = "" if cn else " "
    return joiner.join(pool[(seed + k) % len(pool)] for k in range(n))


def table_html(rows, header=True):
    out = ["<table>"]
    for r, row in enumerate(rows):
        tag = "th" if header and r == 0 else "td"
        out.append("<tr>" + "".join(f"<{tag}>{c}</{tag}>" for c in row) + "</tr>")
    out.append("</table>")
    return "".join(out)


class Doc:
    def __init__(self, doc_id, header=None, footer=False, cn=False):
        self.doc_id = doc_id
        self.header = header
        self.footer = footer
        self.cn = cn
        self.blocks = []
        self.idx = 0
        self.page = -1
        self.y = 0
        self.column = None
        self.hierarchy = []
        self.text_pairs = []
        self.assoc = []
        self.tables = []
        self.current_title = None
        self.seed = 0
        self.new_page(first=True)

    # layout -------------------------------------------------------------
    def _end_page(self):
        if self.footer and self.page >= 0:
            self._emit("footer", str(self.page + 1), 1340, 30, x0=450, x1=550)

    def new_page(self, first=False):
        if not first:
            self._end_page()
        self.page += 1
        self.y = 100
        self.column = None
        if self.header:
            self._emit("header", self.header, 30, 30)

    def columns(self, which):
        """which in (None, 0, 1): full width or the left/right column."""
        if which == 1 and self.column == 0:
            self.y = self.col_top
        if which == 0:
            self.col_top = self.y
        self.column = which

    def _x(self):
        if self.column == 0:
            return 100, 480
        if self.column == 1:
            return 520, 900
        return 100, 900

    def _emit(self, btype, text, y, h, x0=None, x1=None, **extra):
        if x0 is None:
            x0, x1 = self._x()
        block = {"type": btype, "page_idx": self.page, "bbox": [x0, y, x1, y + h]}
        if text is not None:
            block["text"] = text
        block.update(extra)
        self.blocks.append(block)
        if btype == "discarded":
            return None
        i = self.idx
        self.idx += 1
        return i

    def _place(self, btype, text, h, **extra):
        i = self._emit(btype, text, self.y, h, **extra)
        self.y += h + 20
        return i

    # content ------------------------------------------------------------
    def title(self, text, level):
        i = self._place("title", text, 40)
        self.hierarchy.append({"idx": i, "level": level, "content": text})
        self.current_title = i
        return i

    def text(self, content=None, n=2):
        if content is None:
            self.seed += 1
            content = para(self.seed, n, self.cn)
        return self._place("text", content, 100)

    def noise(self, text="watermark"):
        return self._place("discarded", text, 20)

    def split_text(self, head, tail, brk="page", gold=True):
        """A paragraph cut by a page or column break."""
        a = self.text(head)
        if brk == "page":
            self.new_page()
        elif brk == "column":
            self.columns(1)
        b = self.text(tail)
        if gold:
            self.text_pairs.append({"src": a, "tgt": b})
        return a, b

    def image(self, path, caption=None, footnote=None, caption_above=False, link_title=True):
        cap = None
        if caption and caption_above:
            cap = self._place("image_caption", caption, 30)
        img = self._place("image", None, 300, img_path=path)
        if caption and not caption_above:
            cap = self._place("image_caption", caption, 30)
        if cap is not None:
            self.assoc.append({"src": cap, "tgt": img})
        if footnote:
            fn = self._place("image_footnote", footnote, 30)
            self.assoc.append({"src": fn, "tgt": img})
        if link_title and self.current_title is not None:
            self.assoc.append({"src": img, "tgt": self.current_title})
        return img

    def table(self, rows, caption=None, caption_below=False, footnote=None, link_title=True, width=(100, 900),
              header=True):
        cap = None
        if caption and not caption_below:
            cap = self._place("table_caption", caption, 30)
        t = self._place("table", None, 40 * len(rows), table_body=table_html(rows, header), x0=width[0], x1=width[1])
        if caption and caption_below:
            cap = self._place("table_caption", caption, 30)
        if cap is not None:
            self.assoc.append({"src": cap, "tgt": t})
        if footnote:
            fn = self._place("table_footnote", footnote, 30)
            self.assoc.append({"src": fn, "tgt": t})
        if link_title and self.current_title is not None:
            self.assoc.append({"src": t, "tgt": self.current_title})
        return t

    def split_table(self, upper, lower, judgement, caption=None, lower_caption=None, width=(100, 900)):
        """A table whose rows continue on the next page; judgement is the
        true per-column fusion vector for the boundary rows ([] when the
        lower table is not a continuation)."""
        u = self.table(upper, caption=caption, width=width)
        self.new_page()
        lo = self.table(lower, caption=lower_caption, width=width, header=lower[0] == upper[0] or not judgement)
        self.tables.append({"upper": u, "lower": lo, "judgement": judgement})
        return u, lo

    # output -------------------------------------------------------------
    def finish(self):
        self._end_page()
        raw = {"doc_id": self.doc_id, "page_count": self.page + 1, "blocks": self.blocks}
        gold = {
            "version": 1,
            "doc_id": self.doc_id,
            "hierarchy": self.hierarchy,
            "text_truncation": sorted(self.text_pairs, key=lambda p: (p["src"], p["tgt"])),
            "association": sorted(self.assoc, key=lambda p: (p["src"], p["tgt"])),
            "table_truncation": self.tables,
            "evidence": [],
        }
        return raw, gold


# documents -------------------------------------------------------------------


def annual_report():
    """23 titles over 9 pages, four heading depths, running headers."""
    d = Doc("annual_report", header="Northwind Annual Report 2023", footer=True)
    d.title("1 Overview", 1)
    d.text()
    d.title("1.1 Highlights", 2)
    d.text()
    d.title("1.1.1 Financial highlights", 3)
    d.text()
    d.title("1.1.1.1 Revenue", 4)
    d.text()
    d.split_text(
        "Revenue grew in every region, with the strongest gains coming from the northern distribution",
        "network, which benefited from the new warehouse opened in March.",
    )
    d.title("1.1.1.2 Costs", 4)
    d.text()
    d.title("1.1.2 Operational highlights", 3)
    d.text()
    d.image("images/ops.png", caption="Figure 1: Deliveries per month")
    d.title("1.2 Outlook", 2)
    d.text()
    d.new_page()
    d.title("2 Governance", 1)
    d.text()
    d.title("2.1 Board", 2)
    d.text()
    d.title("2.1.1 Composition", 3)
    d.text()
    d.title("2.1.1.1 Independent directors", 4)
    d.text()
    d.title("2.1.1.2 Executive directors", 4)
    d.text()
    d.new_page()
    d.title("2.2 Committees", 2)
    d.text()
    d.table([["Committee", "Chair", "Meetings"], ["Audit", "J. Park", "6"], ["Risk", "L. Chen", "4"]],
            caption="Table 1: Committee meetings")
    d.title("2.3 Remuneration", 2)
    d.text()
    d.new_page()
    d.title("3 Financial statements", 1)
    d.text()
    d.title("3.1 Income statement", 2)
    d.split_table(
        [["Item", "2023", "2022"], ["Revenue", "1,240", "1,105"], ["Cost of sales", "(610)", "(575)"]],
        [["Item", "2023", "2022"], ["Gross profit", "630", "530"], ["Net income", "212", "180"]],
        [0, 0, 0],
        caption="Table 2: Income statement",
    )
    d.text()
    d.new_page()
    d.title("3.2 Balance sheet", 2)
    d.text()
    d.title("3.2.1 Assets", 3)
    d.split_text(
        "Non-current assets include the warehouse network and the vehicle fleet, both carried at",
        "cost less accumulated depreciation and any impairment losses.",
    )
    d.title("3.2.2 Liabilities", 3)
    d.text()
    d.new_page()
    d.title("4 Sustainability", 1)
    d.text()
    d.image("images/emissions.png", caption="Figure 2: Emissions by scope", footnote="Scope 3 is estimated.")
    d.title("4.1 Targets", 2)
    d.text()
    d.title("4.2 Progress", 2)
    d.text()
    d.title("4.3 Next steps", 2)
    d.text()
    return d


def tech_manual():
    d = Doc("tech_manual", footer=True)
    d.title("1 Installation", 1)
    d.text()
    d.title("1.1 Requirements", 2)
    d.text()
    d.title("1.1.1 Hardware", 3)
    d.text()
    d.title("1.1.1.1 Memory", 4)
    d.split_text(
        "At least sixteen gigabytes of memory are recommended for the indexing ser-",
        "vice, which keeps its working set resident while rebuilding.",
    )
    d.title("1.1.1.2 Storage", 4)
    d.text()
    d.title("1.2 Procedure", 2)
    d.text()
    d.new_page()
    d.title("2 Operation", 1)
    d.text()
    d.title("2.1 Release history", 2)
    d.split_table(
        [["Date", "Version", "Notes"], ["2022-11-02", "3.0", "Initial release"], ["2023-", "3.1", "Index rebuild is"]],
        [["01-15", "", "now incremental"], ["2023-06-30", "3.2", "Bug fixes"]],
        [1, 0, 1],
        caption="Table 1: Releases",
    )
    d.text()
    d.title("2.2 Monitoring", 2)
    d.image("images/dashboard.png", caption="Figure 1: Monitoring dashboard")
    d.split_text(
        "The dashboard refreshes every thirty seconds and highlights any node whose queue depth exceeds the",
        "configured limit for more than five minutes.",
    )
    d.title("2.2.1 Alerts", 3)
    d.text()
    d.title("2.2.1.1 Thresholds", 4)
    d.text()
    d.new_page()
    d.title("3 Troubleshooting", 1)
    d.text()
    d.text()
    return d


def cn_regulation():
    d = Doc("cn_regulation", header="内部管理办法", cn=True)
    d.title("第一章 总则", 1)
    d.text()
    d.title("第一节 目的", 2)
    d.title("第一条 制定依据", 3)
    d.text()
    d.title("（一）适用范围", 4)
    d.split_text("本办法所称下属单位是指公司直接或间接控股的", "各类企业以及实际控制的其他经济组织。")
    d.title("（二）基本原则", 4)
    d.text()
    d.title("第二条 管理职责", 3)
    d.text()
    d.new_page()
    d.title("第二章 预算管理", 1)
    d.text()
    d.title("第一节 预算编制", 2)
    d.title("第三条 编制要求", 3)
    d.split_table(
        [["项目", "负责部门", "时间"], ["收入预算", "财务部", "十月"], ["费用预算", "各部门", "十月"]],
        [["项目", "负责部门", "时间"], ["投资预算", "投资部", "十一月"]],
        [0, 0, 0],
        caption="表1 预算编制分工",
        lower_caption="表1 预算编制分工（续）",
    )
    d.text()
    d.title("第四条 审批程序", 3)
    d.split_text("预算草案经财务部汇总后提交总经理办公会审议，审议通过后报", "董事会批准并下达执行。")
    d.title("第二节 预算执行", 2)
    d.title("第五条 执行监控", 3)
    d.text()
    d.new_page()
    d.title("第三章 附则", 1)
    d.title("第一节 解释", 2)
    d.title("第六条 解释权", 3)
    d.text()
    return d


def research_paper():
    d = Doc("research_paper")
    d.title("I. INTRODUCTION", 1)
    d.text()
    d.title("II. METHOD", 1)
    d.title("A. Data", 2)
    d.text()
    d.title("1) Collection", 3)
    d.text()
    d.title("(a) Sensors", 4)
    d.text()
    d.title("(b) Sampling", 4)
    d.image("images/setup.png", caption="Fig. 1. Sensor placement.")
    d.text()
    d.title("2) Cleaning", 3)
    d.text()
    d.new_page()
    d.title("B. Model", 2)
    d.text()
    d.table([["Model", "Params", "Error"], ["Linear", "12", "0.31"], ["Tree", "40", "0.22"]],
            caption="TABLE I. Model comparison")
    d.title("III. RESULTS", 1)
    d.split_text(
        "The tree model reduces error by almost a third relative to the linear baseline, although the",
        "gap narrows once the sampling rate exceeds ten hertz.",
    )
    d.image("images/curve.png", caption="Fig. 2. Error against sampling rate.")
    d.title("IV. CONCLUSION", 1)
    d.text()
    return d


def one_page_memo():
    d = Doc("one_page_memo")
    d.title("1 Memo", 1)
    d.text("This memo summarises the decisions taken at the planning meeting.")
    d.title("1.1 Decisions", 2)
    d.title("1.1.1 Budget", 3)
    d.title("1.1.1.1 Travel", 4)
    d.text("Travel spending is capped at last year's level.")
    d.image("images/chart.png", caption="Figure 1: Travel spending by quarter")
    d.title("1.1.1.2 Training", 4)
    d.text("Training budgets move to the department heads.")
    return d


def text_pairs():
    """15 text blocks, so 14 adjacent pairs; five survive filtering and the
    baseline rules accept two of them."""
    d = Doc("text_pairs")
    d.title("1 Notes", 1)
    d.title("1.1 Field notes", 2)
    d.title("1.1.1 Site A", 3)
    d.title("1.1.1.1 Day one", 4)
    t = [
        "The crew arrived early and set up the equipment.",
        "Weather was clear until noon.",
        "1. Check the generator",
        "2. Inspect the cables.",
        "After lunch the team moved the rig to the east",
        "ridge where the ground was firmer.",
        "Readings were logged every ten minutes;",
        "(a) Soil moisture was low.",
        "The second sensor reported values in",
        "Kelvin rather than Celsius.",
        "Nothing else was unusual",
        "apart from a short power dip.",
        "The crew left at six",
        "Equipment was stored in the shed.",
        "Tomorrow the crew will survey the north slope.",
    ]
    ids = [d.text(s) for s in t[:7]]
    d.new_page()
    ids += [d.text(s) for s in t[7:]]
    # true truncations by construction
    d.text_pairs = [{"src": ids[4], "tgt": ids[5]}, {"src": ids[8], "tgt": ids[9]}, {"src": ids[10], "tgt": ids[11]}]
    return d


def keyword_book():
    d = Doc("keyword_book", header="Field Guide")
    d.title("Part I Foundations", 1)
    d.title("Chapter 1 Terrain", 2)
    d.text()
    d.title("Section 1.1 Slopes", 3)
    d.text()
    d.title("(a) Gentle slopes", 4)
    d.text()
    d.title("(b) Steep slopes", 4)
    d.image("images/slope.png", caption="Figure 1.1 Slope classes", caption_above=True)
    d.title("Summary", 3)
    d.text()
    d.new_page()
    d.title("Chapter 2 Water", 2)
    d.text()
    d.title("Section 2.1 Streams", 3)
    d.split_text(
        "Streams that cross the trail after heavy rain should be forded at the widest",
        "point, where the current is usually slowest.",
    )
    d.title("Part II Practice", 1)
    d.title("Chapter 3 Navigation", 2)
    d.title("Section 3.1 Maps", 3)
    d.title("(a) Scale", 4)
    d.text()
    d.new_page()
    d.title("Appendix A Checklists", 1)
    d.table([["Item", "Qty"], ["Rope", "1"], ["Compass", "1"]], caption="Table A.1 Kit list")
    return d


def financial_tables():
    d = Doc("financial_tables", footer=True)
    d.title("1 Results", 1)
    d.title("1.1 Segments", 2)
    d.title("1.1.1 Retail", 3)
    d.title("1.1.1.1 Stores", 4)
    d.text()
    d.split_table(
        [["Region", "Stores", "Sales"], ["North", "41", "320"], ["South", "37", "298"]],
        [["East", "29", "240"], ["West", "33", "251"]],
        [0, 0, 0],
        caption="Table 1: Stores by region",
    )
    d.title("1.1.1.2 Online", 4)
    d.text()
    d.split_table(
        [["Quarter", "Visits", "Orders"], ["Q1", "1.2m", "40k"], ["Q2", "1.4m", "46k"]],
        [["Quarter", "Staff", "Hires"], ["Q1", "310", "12"], ["Q2", "318", "9"]],
        [],
        caption="Table 2: Online traffic",
        lower_caption="Table 3: Headcount",
    )
    d.title("1.2 Cash flow", 2)
    d.split_table(
        [["Line", "Amount", "Comment"], ["Operating", "410", "Strong collections in"]],
        [["", "", "the fourth quarter"], ["Investing", "(150)", "Warehouse"]],
        [0, 0, 1],
        caption="Table 4: Cash flow",
    )
    d.text()
    return d


def two_column_article():
    d = Doc("two_column_article")
    d.title("1 Background", 1)
    d.title("1.1 Context", 2)
    d.title("1.1.1 Prior work", 3)
    d.title("1.1.1.1 Surveys", 4)
    d.columns(0)
    d.text()
    d.split_text(
        "Earlier surveys relied on postal questionnaires, which limited both the response rate and the",
        "range of questions that could reasonably be asked.",
        brk="column",
    )
    d.text()
    d.new_page()
    d.title("1.1.1.2 Panels", 4)
    d.columns(0)
    d.split_text(
        "Panel studies follow the same households over several years and can therefore separate",
        "short-term shocks from lasting changes in behaviour.",
        brk="column",
    )
    d.image("images/panel.png", caption="Figure 1: Panel retention")
    d.columns(None)
    d.title("1.2 Aims", 2)
    d.text()
    return d


def cn_report():
    d = Doc("cn_report", cn=True, footer=True)
    d.title("第一章 概况", 1)
    d.title("第一节 基本情况", 2)
    d.title("第一条 经营范围", 3)
    d.title("（一）主营业务", 4)
    d.text()
    d.image("images/cn_map.png", caption="图1 业务分布")
    d.split_text("报告期内公司新增三个区域服务中心，服务网络覆盖", "全部地级市并延伸至部分县城。")
    d.title("（二）其他业务", 4)
    d.split_table(
        [["业务", "收入", "占比"], ["物流", "820", "66%"], ["仓储", "300", "24%"]],
        [["咨询", "80", "6%"], ["其他", "40", "4%"]],
        [0, 0, 0],
        caption="表1 收入构成",
        lower_caption="表1 收入构成（续）",
    )
    d.title("第二章 展望", 1)
    d.text()
    return d


def long_report():
    """Twenty pages: several chunks at the default stride."""
    d = Doc("long_report", header="Programme Review", footer=True)
    for ch in range(1, 6):
        d.title(f"{ch} Workstream {ch}", 1)
        d.text()
        for sec in range(1, 3):
            d.title(f"{ch}.{sec} Phase {sec}", 2)
            d.text()
            d.title(f"{ch}.{sec}.1 Scope", 3)
            d.text()
            d.title(f"{ch}.{sec}.1.1 Deliverables", 4)
            d.text()
            d.new_page()
            d.title(f"{ch}.{sec}.2 Risks", 3)
            if ch == 3 and sec == 1:
                d.split_text(
                    "The integration risk was reassessed after the vendor delayed the interface",
                    "specification by six weeks, pushing testing into the holiday period.",
                )
            else:
                d.text()
            if ch == 4 and sec == 2:
                d.image("images/risk.png", caption="Figure 1: Risk heat map")
            if not (ch == 5 and sec == 2):
                d.new_page()
    return d


def figure_gallery():
    d = Doc("figure_gallery")
    d.image("images/cover.png", link_title=False)
    d.title("1 Gallery", 1)
    d.title("1.1 Landscapes", 2)
    d.title("1.1.1 Coast", 3)
    d.title("1.1.1.1 Cliffs", 4)
    d.image("images/cliff.png", caption="Figure 1: Chalk cliffs", footnote="Photo: archive.")
    d.image("images/bay.png", caption="Figure 2: The bay at dusk", caption_above=True)
    d.title("1.1.1.2 Dunes", 4)
    d.text()
    d.image("images/dune.png")
    d.new_page()
    d.title("1.2 Portraits", 2)
    d.text()
    d.table([["Sitter", "Year"], ["Ada", "1921"], ["Ben", "1934"]], caption="Table 1: Sitters", caption_below=True,
            footnote="Years are approximate.")
    return d


DOCS = [
    annual_report,
    tech_manual,
    cn_regulation,
    research_paper,
    one_page_memo,
    text_pairs,
    keyword_book,
    financial_tables,
    two_column_article,
    cn_report,
    long_report,
    figure_gallery,
]


def main():
    (ROOT / "docs").mkdir(exist_ok=True)
    (ROOT / "gold").mkdir(exist_ok=True)
    for make in DOCS:
        doc = make()
        raw, gold = doc.finish()
        for sub, obj in (("docs", raw), ("gold", gold)):
            path = ROOT / sub / f"{doc.doc_id}.json"
            path.write_text(json.dumps(obj, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
