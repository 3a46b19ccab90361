package org.softlang.company.xjc;

public class Department {
}
