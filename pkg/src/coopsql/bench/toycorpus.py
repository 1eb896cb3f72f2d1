"""Authored desk-scale corpus: three databases, twenty-four questions.

The corpus is written out in the standard benchmark layout (tables
description file, questions file, one SQLite database per db_id) so the
loader and CLI exercise the same code paths as a real distribution. Half
the questions need joins that straddle the seed-0 two-way table split, the
rest mostly live inside the first fragment; every gold query returns at
least one row.
"""

from __future__ import annotations

import json
import os
import sqlite3

_SQL_TYPES = {"number": "INTEGER", "text": "TEXT", "time": "INTEGER"}

# (db_id, tables, foreign keys, questions)
# table: (name, [(column, type)], primary key columns, rows)
# foreign key: (from table, from column, to table, to column)
# question: (text, gold sql)
TOY_DBS = [
    {
        "db_id": "company",
        "tables": [
            ("department", [("id", "number"), ("name", "text"), ("city", "text")], ["id"],
             [(1, "Research", "Springfield"), (2, "Marketing", "Shelbyville"),
              (3, "Operations", "Capital City")]),
            ("employee", [("id", "number"), ("name", "text"), ("age", "number"),
                          ("dept_id", "number")], ["id"],
             [(1, "Alice", 42, 1), (2, "Bob", 38, 1), (3, "Carol", 45, 2),
              (4, "Dave", 29, 3), (5, "Erin", 51, 1)]),
            ("project", [("id", "number"), ("title", "text"), ("budget", "number"),
                         ("dept_id", "number")], ["id"],
             [(1, "Apollo", 90000, 1), (2, "Borealis", 45000, 2), (3, "Cascade", 60000, 1)]),
            ("assignment", [("emp_id", "number"), ("proj_id", "number"),
                            ("hours", "number")], ["emp_id", "proj_id"],
             [(1, 1, 120), (1, 3, 40), (2, 1, 80), (3, 2, 60), (5, 1, 200), (4, 3, 30)]),
        ],
        "foreign_keys": [
            ("employee", "dept_id", "department", "id"),
            ("project", "dept_id", "department", "id"),
            ("assignment", "emp_id", "employee", "id"),
            ("assignment", "proj_id", "project", "id"),
        ],
        "questions": [
            ("How many departments are there?",
             "SELECT count(*) FROM department"),
            ("What is the total budget across all initiatives?",
             "SELECT sum(budget) FROM project"),
            ("List the titles of initiatives funded above 50000.",
             "SELECT title FROM project WHERE budget > 50000"),
            ("How many staff members are older than 40?",
             "SELECT count(*) FROM employee WHERE age > 40"),
            ("List the names of staff members based in Springfield.",
             "SELECT employee.name FROM employee JOIN department "
             "ON employee.dept_id = department.id WHERE department.city = 'Springfield'"),
            ("How many working hours were logged on the Apollo initiative?",
             "SELECT sum(assignment.hours) FROM assignment JOIN project "
             "ON assignment.proj_id = project.id WHERE project.title = 'Apollo'"),
            ("Which staff members contributed to the Apollo initiative?",
             "SELECT employee.name FROM employee JOIN assignment "
             "ON assignment.emp_id = employee.id JOIN project "
             "ON assignment.proj_id = project.id WHERE project.title = 'Apollo'"),
            ("Which staff members belong to units running an initiative funded above 50000?",
             "SELECT employee.name FROM employee JOIN department "
             "ON employee.dept_id = department.id WHERE department.id IN "
             "(SELECT dept_id FROM project WHERE budget > 50000)"),
        ],
    },
    {
        "db_id": "library",
        "tables": [
            ("author", [("id", "number"), ("name", "text"), ("country", "text")], ["id"],
             [(1, "Isabel Allende", "Chile"), (2, "Pablo Neruda", "Chile"),
              (3, "Jane Austen", "England")]),
            ("book", [("id", "number"), ("title", "text"), ("year", "number"),
                      ("author_id", "number")], ["id"],
             [(1, "House of Spirits", 1982, 1), (2, "Paula", 1994, 1),
              (3, "Twenty Love Poems", 1924, 2), (4, "Emma", 1815, 3),
              (5, "Persuasion", 1817, 3)]),
            ("member", [("id", "number"), ("name", "text"), ("joined", "number")], ["id"],
             [(1, "Ana Silva", 2021), (2, "Ben Wright", 2019), (3, "Chloe Park", 2022)]),
            ("loan", [("id", "number"), ("book_id", "number"), ("member_id", "number"),
                      ("due", "number")], ["id"],
             [(1, 1, 1, 20240110), (2, 2, 1, 20240215), (3, 4, 2, 20240120),
              (4, 1, 3, 20240301)]),
        ],
        "foreign_keys": [
            ("book", "author_id", "author", "id"),
            ("loan", "book_id", "book", "id"),
            ("loan", "member_id", "member", "id"),
        ],
        "questions": [
            ("How many writers come from Chile?",
             "SELECT count(*) FROM author WHERE country = 'Chile'"),
            ("List the names of readers who joined after 2020.",
             "SELECT name FROM member WHERE joined > 2020"),
            ("How many writers are listed in total?",
             "SELECT count(*) FROM author"),
            ("What are the titles published after 1990?",
             "SELECT title FROM book WHERE year > 1990"),
            ("List the titles written by Isabel Allende from newest to oldest.",
             "SELECT book.title FROM book JOIN author ON book.author_id = author.id "
             "WHERE author.name = 'Isabel Allende' ORDER BY book.year DESC"),
            ("How many borrowings were made by Ana Silva?",
             "SELECT count(*) FROM loan JOIN member ON loan.member_id = member.id "
             "WHERE member.name = 'Ana Silva'"),
            ("Count the titles written by Chilean writers.",
             "SELECT count(*) FROM book JOIN author ON book.author_id = author.id "
             "WHERE author.country = 'Chile'"),
            ("Which titles were borrowed by Ana Silva?",
             "SELECT book.title FROM book JOIN loan ON loan.book_id = book.id "
             "JOIN member ON loan.member_id = member.id WHERE member.name = 'Ana Silva'"),
        ],
    },
    {
        "db_id": "retail",
        "tables": [
            ("customer", [("id", "number"), ("name", "text"), ("city", "text")], ["id"],
             [(1, "Maria Rossi", "Lisbon"), (2, "Joao Costa", "Porto"),
              (3, "Lena Berg", "Lisbon")]),
            ("product", [("id", "number"), ("name", "text"), ("price", "number"),
                         ("category", "text")], ["id"],
             [(1, "Lamp", 120, "home"), (2, "Mug", 15, "kitchen"),
              (3, "Desk", 300, "office"), (4, "Pen", 5, "office")]),
            ("orders", [("id", "number"), ("customer_id", "number"),
                        ("placed", "number")], ["id"],
             [(1, 1, 20240102), (2, 2, 20240105), (3, 1, 20240110), (4, 3, 20240102)]),
            ("order_item", [("order_id", "number"), ("product_id", "number"),
                            ("quantity", "number")], ["order_id", "product_id"],
             [(1, 1, 2), (1, 2, 4), (2, 4, 10), (3, 3, 1), (4, 2, 6), (3, 1, 1)]),
        ],
        "foreign_keys": [
            ("orders", "customer_id", "customer", "id"),
            ("order_item", "order_id", "orders", "id"),
            ("order_item", "product_id", "product", "id"),
        ],
        "questions": [
            ("How many shoppers live in Lisbon?",
             "SELECT count(*) FROM customer WHERE city = 'Lisbon'"),
            ("List the cities where shoppers live.",
             "SELECT DISTINCT city FROM customer"),
            ("How many purchases were placed by shoppers from Lisbon?",
             "SELECT count(*) FROM orders JOIN customer ON orders.customer_id = customer.id "
             "WHERE customer.city = 'Lisbon'"),
            ("How many items were included in purchases placed on day 20240102?",
             "SELECT sum(order_item.quantity) FROM order_item JOIN orders "
             "ON order_item.order_id = orders.id WHERE orders.placed = 20240102"),
            ("List the distinct product names bought by Maria Rossi.",
             "SELECT DISTINCT product.name FROM product JOIN order_item "
             "ON order_item.product_id = product.id JOIN orders "
             "ON order_item.order_id = orders.id JOIN customer "
             "ON orders.customer_id = customer.id WHERE customer.name = 'Maria Rossi'"),
            ("How many purchases included at least one product priced above 100?",
             "SELECT count(DISTINCT orders.id) FROM orders JOIN order_item "
             "ON order_item.order_id = orders.id JOIN product "
             "ON order_item.product_id = product.id WHERE product.price > 100"),
            ("Which shoppers bought a Lamp?",
             "SELECT DISTINCT customer.name FROM customer JOIN orders "
             "ON orders.customer_id = customer.id JOIN order_item "
             "ON order_item.order_id = orders.id JOIN product "
             "ON order_item.product_id = product.id WHERE product.name = 'Lamp'"),
            ("List the names of shoppers from Lisbon together with the names of shoppers from Porto.",
             "SELECT name FROM customer WHERE city = 'Lisbon' "
             "UNION SELECT name FROM customer WHERE city = 'Porto'"),
        ],
    },
]


def _tables_entry(db: dict) -> dict:
    table_names = [t[0] for t in db["tables"]]
    column_names: list[list] = [[-1, "*"]]
    column_types = ["text"]
    index_of: dict[tuple[str, str], int] = {}
    for ti, (name, columns, _pk, _rows) in enumerate(db["tables"]):
        for col, ctype in columns:
            index_of[(name, col)] = len(column_names)
            column_names.append([ti, col])
            column_types.append(ctype)
    primary_keys: list = []
    for name, _columns, pk, _rows in db["tables"]:
        if len(pk) == 1:
            primary_keys.append(index_of[(name, pk[0])])
        elif pk:
            primary_keys.append([index_of[(name, c)] for c in pk])
    foreign_keys = [
        [index_of[(ft, fc)], index_of[(tt, tc)]]
        for ft, fc, tt, tc in db["foreign_keys"]
    ]
    return {
        "db_id": db["db_id"],
        "table_names_original": table_names,
        "table_names": table_names,
        "column_names_original": column_names,
        "column_names": column_names,
        "column_types": column_types,
        "primary_keys": primary_keys,
        "foreign_keys": foreign_keys,
    }


def _build_db(db: dict, path: str) -> None:
    if os.path.exists(path):
        os.remove(path)
    conn = sqlite3.connect(path)
    try:
        for name, columns, pk, rows in db["tables"]:
            cols = ", ".join(f"{c} {_SQL_TYPES[t]}" for c, t in columns)
            pk_clause = f", PRIMARY KEY ({', '.join(pk)})" if pk else ""
            conn.execute(f"CREATE TABLE {name} ({cols}{pk_clause})")
            placeholders = ", ".join("?" for _ in columns)
            conn.executemany(f"INSERT INTO {name} VALUES ({placeholders})", rows)
        conn.commit()
    finally:
        conn.close()


def build_toy_corpus(root: str) -> str:
    """Materialize the corpus under `root` in benchmark layout; returns root."""
    os.makedirs(root, exist_ok=True)
    db_dir = os.path.join(root, "database")
    tables = []
    questions = []
    for db in TOY_DBS:
        tables.append(_tables_entry(db))
        target = os.path.join(db_dir, db["db_id"])
        os.makedirs(target, exist_ok=True)
        _build_db(db, os.path.join(target, f"{db['db_id']}.sqlite"))
        for i, (text, gold) in enumerate(db["questions"], start=1):
            questions.append({
                "question_id": f"{db['db_id']}-{i:02d}",
                "question": text,
                "db_id": db["db_id"],
                "query": gold,
            })
    with open(os.path.join(root, "tables.json"), "w", encoding="utf-8") as fh:
        json.dump(tables, fh, indent=2)
    with open(os.path.join(root, "questions.json"), "w", encoding="utf-8") as fh:
        json.dump(questions, fh, indent=2)
    return root
